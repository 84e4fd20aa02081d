#include "flag/io.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>

using namespace flag;

TEST_CASE("dataset CSV round trip") {
    oracle::Gen g(1);
    const BinaryDataset data(oracle::random_binary(25, 7, g));
    std::ostringstream os;
    write_dataset_csv(os, data);
    CHECK(os.str().rfind("item1,item2,", 0) == 0);
    std::istringstream is(os.str());
    CHECK(read_dataset_csv(is) == data);
}

TEST_CASE("dataset CSV without header, with CRLF and blank lines") {
    std::istringstream is("1,0,1\r\n0,0,1\n\n1,1,1\n");
    const BinaryDataset d = read_dataset_csv(is);
    CHECK(d.n_subjects() == 3);
    CHECK(d.n_items() == 3);
    CHECK(d.responses()(2, 1) == 1.0);
}

TEST_CASE("dataset CSV errors name the position") {
    std::istringstream bad("a,b\n0,1\n1,2\n");
    try {
        read_dataset_csv(bad);
        FAIL("expected an error");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("line 3, column 2") != std::string::npos);
    }
    std::istringstream ragged("0,1\n1\n");
    CHECK_THROWS_AS(read_dataset_csv(ragged), InputError);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_dataset_csv(empty), InputError);
    CHECK_THROWS_AS(read_dataset_csv(std::string("/nonexistent/file.csv")), InputError);
}

TEST_CASE("model JSON round trip with 1-based edges") {
    ModelFile m;
    m.l = Matrix::Identity(3, 3);
    m.s = Matrix::Zero(3, 3);
    m.s(0, 2) = m.s(2, 0) = -0.25;
    m.a = Matrix::Ones(3, 1);
    m.k_hat = 1;
    m.edges = {{0, 2}};
    m.provenance["command"] = "fit";
    const nlohmann::json j = model_to_json(m);
    CHECK(j["edges"][0][0] == 1);
    CHECK(j["edges"][0][1] == 3);
    const ModelFile back = model_from_json(j);
    CHECK(back.l == m.l);
    CHECK(back.s == m.s);
    CHECK(back.a == m.a);
    CHECK(back.k_hat == 1);
    CHECK(back.edges == m.edges);
    CHECK(back.provenance["command"] == "fit");

    const auto path = (std::filesystem::temp_directory_path() / "flag_io_model.json").string();
    write_model(path, m);
    CHECK(read_model(path).s == m.s);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(model_from_json(nlohmann::json::parse(R"({"L": [[1]], "S": [[1, 2]]})")), InputError);
}

TEST_CASE("matrix JSON keeps full precision") {
    Matrix m(1, 2);
    m << 0.1, 1.0 / 3.0;
    CHECK(matrix_from_json(nlohmann::json::parse(matrix_to_json(m).dump())) == m);
}
