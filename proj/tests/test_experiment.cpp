#include "support.hpp"

#include "mar/errors.hpp"
#include "mar/experiment.hpp"

#include <cmath>

using namespace mar;
using namespace mar::test;

namespace {

ExperimentSpec small_spec(ExperimentKind kind) {
    ExperimentSpec spec;
    spec.kind = kind;
    spec.band = {1, 1};
    spec.T_values = {60, 120};
    spec.n_reps = 4;
    spec.seed = 42;
    if (kind == ExperimentKind::sparse) {
        spec.design = DesignKind::sparse;
        spec.rho = 0.9;
        spec.nonzero_rule = NonzeroRule::nearest;
        spec.tunings = {TuningKind::ksc, TuningKind::mcv};
        spec.tuning.ksc_splits = 6;
        spec.tuning.n_lambda = 20;
        spec.tuning.folds = 4;
    }
    return spec;
}

}  // namespace

TEST_CASE("tables per experiment kind") {
    SUBCASE("order") {
        const auto r = run_monte_carlo(small_spec(ExperimentKind::order));
        CHECK(r.table.columns.size() == 11);
        CHECK(r.table.rows.size() == 2);
        const auto* cell = r.find(120, "banded");
        REQUIRE(cell != nullptr);
        CHECK(cell->metrics.at("log10_A").size() == 4);
    }
    SUBCASE("bandwidth") {
        const auto r = run_monte_carlo(small_spec(ExperimentKind::bandwidth));
        CHECK(r.table.columns.back() == "freq_k2_pct");
        const auto* cell = r.find(60, "banded");
        REQUIRE(cell != nullptr);
        for (double hit : cell->metrics.at("hit_k1")) CHECK((hit == 0.0 || hit == 1.0));
    }
    SUBCASE("error") {
        auto spec = small_spec(ExperimentKind::error);
        spec.estimators = {Estimator::alse, Estimator::banded, Estimator::lasso};
        spec.tuning.ksc_splits = 6;
        spec.tuning.n_lambda = 20;
        const auto r = run_monte_carlo(spec);
        CHECK(r.cells.size() == 6);
        CHECK(r.table.rows.size() == 6);
        CHECK(r.attempts == 24);
        CHECK(r.find(60, "lasso") != nullptr);
        CHECK(r.find(61, "lasso") == nullptr);
    }
    SUBCASE("sparse") {
        const auto r = run_monte_carlo(small_spec(ExperimentKind::sparse));
        CHECK(r.cells.size() == 6);
        const auto* ksc = r.find(120, "ksc");
        REQUIRE(ksc != nullptr);
        CHECK(ksc->metrics.count("cr_A") == 1);
        CHECK(r.find(120, "alse")->metrics.count("cr_A") == 0);
        const std::string csv = r.table.to_csv();
        CHECK(csv.rfind("method,", 0) == 0);
    }
}

TEST_CASE("results are reproducible and independent of the thread count") {
    auto spec = small_spec(ExperimentKind::sparse);
    const auto one = run_monte_carlo(spec);
    spec.threads = 4;
    const auto four = run_monte_carlo(spec);
    CHECK(one.table.to_csv() == four.table.to_csv());
    REQUIRE(one.cells.size() == four.cells.size());
    for (std::size_t i = 0; i < one.cells.size(); ++i) CHECK(one.cells[i].metrics == four.cells[i].metrics);
    const auto other = run_monte_carlo(spec, spec.n_reps, 43);
    CHECK(other.table.to_csv() != one.table.to_csv());
}

TEST_CASE("repeated T values give identical cells") {
    auto spec = small_spec(ExperimentKind::bandwidth);
    spec.T_values = {80, 80};
    const auto r = run_monte_carlo(spec);
    CHECK(r.cells[0].metrics == r.cells[1].metrics);
}

TEST_CASE("failures are recorded rather than thrown") {
    ExperimentSpec spec;
    spec.kind = ExperimentKind::error;
    spec.p1 = 8;
    spec.p2 = 1;
    spec.band = {1, 0};
    spec.T_values = {3};
    spec.n_reps = 3;
    const auto r = run_monte_carlo(spec);
    CHECK(r.attempts == 6);
    CHECK(r.failures == 6);
    for (const auto& c : r.cells) {
        CHECK(c.failures == 3);
        CHECK(c.failure_messages.size() == 3);
        CHECK(c.metrics.empty());
    }
    CHECK(r.table.rows.front()[6] == "nan");
}

TEST_CASE("spec validation") {
    ExperimentSpec spec;
    spec.n_reps = 0;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = ExperimentSpec{};
    spec.T_values = {2};
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = ExperimentSpec{};
    spec.kind = ExperimentKind::order;
    spec.design = DesignKind::sparse;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = ExperimentSpec{};
    spec.band = {7, 1};
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    CHECK_THROWS_AS(parse_experiment_kind("nope"), ConfigError);
    CHECK(parse_estimator("banded") == Estimator::banded);
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(-INFINITY) == "-inf");
    CHECK(format_double(NAN) == "nan");
}
