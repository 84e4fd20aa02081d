#include "flag/evaluation.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

using namespace flag;

namespace {

Matrix pair_graph(Index j, const EdgeList& edges) {
    Matrix s = Matrix::Zero(j, j);
    for (const auto& [a, b] : edges) s(a, b) = s(b, a) = 1.0;
    return s;
}

}  // namespace

TEST_CASE("selection metrics on hand cases") {
    const EdgeList truth = {{0, 1}, {2, 3}};
    const Matrix s = pair_graph(5, truth);
    Vector a = Vector::Ones(5);
    const Matrix l = a * a.transpose();

    const SelectionMetrics perfect = selection_metrics(1, truth, l, s);
    CHECK(perfect.c2 == 1);
    CHECK(perfect.c3 == 1.0);
    CHECK(perfect.c4 == 0.0);

    const SelectionMetrics partial = selection_metrics(2, {{0, 1}, {0, 4}, {1, 4}}, l, s);
    CHECK(partial.c2 == 0);
    CHECK(partial.c3 == doctest::Approx(0.5));
    CHECK(partial.c4 == doctest::Approx(2.0 / 8.0));

    const SelectionMetrics none = selection_metrics(0, {{1, 2}}, Matrix::Zero(5, 5), Matrix::Zero(5, 5));
    CHECK(none.c2 == 1);
    CHECK(std::isnan(none.c3));
    CHECK(none.c4 == doctest::Approx(0.1));
}

TEST_CASE("path capture needs the exact edge set and rank") {
    const EdgeList truth = {{0, 1}};
    const Matrix s = pair_graph(4, truth);
    const Matrix l = Matrix::Ones(4, 4);
    std::vector<PathEntry> path(2);
    path[0].k_hat = 1;
    path[0].edges = {{0, 1}, {1, 2}};
    path[1].k_hat = 2;
    path[1].edges = truth;
    CHECK(criterion_path_capture(path, l, s) == 0);
    path[1].k_hat = 1;
    CHECK(criterion_path_capture(path, l, s) == 1);
}

TEST_CASE("replicate seeds are pure and distinct") {
    CHECK(replicate_seed(1, 1, 250, 0) == replicate_seed(1, 1, 250, 0));
    std::set<std::uint64_t> seen;
    for (int setting = 1; setting <= 3; ++setting)
        for (Index n : {250, 2000})
            for (int rep = 0; rep < 10; ++rep) seen.insert(replicate_seed(7, setting, n, rep));
    CHECK(seen.size() == 60);
}

TEST_CASE("study grid scales with N") {
    const GridConfig g = study_grid(400);
    REQUIRE(g.gammas.size() == 10);
    CHECK(g.gammas.back() == doctest::Approx(3.0 / 20.0));
    CHECK(g.gammas.front() == doctest::Approx(0.015));
    CHECK(g.rhos == std::vector<double>{2.0, 4.0, 6.0, 8.0});
}

TEST_CASE("summaries: means and standard errors") {
    std::vector<ReplicateResult> reps(3);
    const double c3[] = {1.0, 0.5, 0.0};
    for (int i = 0; i < 3; ++i) {
        reps[i].rep = i;
        reps[i].c1 = i < 2;
        reps[i].metrics.c2 = 1;
        reps[i].metrics.c3 = c3[i];
        reps[i].metrics.c4 = 0.1;
    }
    reps.push_back(ReplicateResult{});
    reps.back().failed = true;
    const StudyResult s = summarize(1, 250, reps);
    CHECK(s.reps == 4);
    CHECK(s.failures == 1);
    CHECK(s.c1_mean == doctest::Approx(2.0 / 3.0));
    CHECK(s.c2_mean == doctest::Approx(1.0));
    CHECK(s.c3_mean == doctest::Approx(0.5));
    CHECK(s.c3_se == doctest::Approx(0.5 / std::sqrt(3.0)));
    CHECK(s.c4_se == doctest::Approx(0.0));
}

TEST_CASE("a small study is reproducible and independent of the worker count") {
    StudyConfig cfg;
    cfg.settings = {1};
    cfg.ns = {150};
    cfg.reps = 2;
    cfg.seed = 5;
    cfg.grid = [](Index) {
        GridConfig g;
        g.gammas = {0.1, 0.2};
        g.rhos = {4.0};
        return g;
    };
    auto render = [](const std::vector<StudyResult>& r) {
        std::ostringstream os;
        write_table1_csv(os, r);
        write_figure3_csv(os, r);
        write_replicates_csv(os, r);
        return os.str();
    };
    cfg.jobs = 1;
    const auto one = run_simulation_study(cfg);
    cfg.jobs = 2;
    const auto two = run_simulation_study(cfg);
    REQUIRE(one.size() == 1);
    CHECK(one[0].replicates.size() == 2);
    CHECK(render(one) == render(two));
    CHECK(render(one).rfind("setting,N,reps,failures,C2_mean", 0) == 0);
}
