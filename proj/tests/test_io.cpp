#include "support.hpp"

#include "mar/errors.hpp"
#include "mar/io.hpp"

#include <fstream>
#include <sstream>

using namespace mar;
using namespace mar::test;

namespace {

std::size_t parse_error_line(const std::string& text) {
    std::istringstream in(text);
    try {
        read_series_csv(in);
    } catch (const ParseError& e) {
        return e.line();
    }
    FAIL("expected a ParseError");
    return 0;
}

ExperimentConfig parse_config(const std::string& text) {
    std::istringstream in(text);
    return parse_experiment_config(in);
}

const std::string kMinimalConfig = "experiment = error\np1 = 6\np2 = 4\nT = 200\nn_reps = 3\n";

}  // namespace

TEST_CASE("series CSV round trip is exact") {
    Rng rng(1);
    std::vector<Matrix> data;
    for (int t = 0; t < 7; ++t) data.push_back(gaussian(3, 2, rng) * 1e-3);
    data[2](1, 1) = 1e300;
    data[3](0, 0) = -0.0;
    const MatrixSeries s(data);
    std::stringstream buffer;
    write_series_csv(buffer, s);
    const auto back = read_series_csv(buffer);
    REQUIRE(back.length() == 7);
    for (std::size_t t = 0; t < 7; ++t) CHECK(back[t] == s[t]);

    TempDir dir("io");
    write_series_file(dir.file("s.csv"), s);
    CHECK(read_series_file(dir.file("s.csv"))[6] == s[6]);
    CHECK_THROWS_AS(read_series_file(dir.file("missing.csv")), ParseError);
}

TEST_CASE("series CSV parsing") {
    SUBCASE("rows may come in any order and tolerate whitespace") {
        std::istringstream in("t,row,col,value\n2,1,1, 4\n1,1,1,3 \n");
        const auto s = read_series_csv(in);
        CHECK(s.length() == 2);
        CHECK(s[0](0, 0) == 3.0);
        CHECK(s[1](0, 0) == 4.0);
    }
    SUBCASE("errors name the offending line") {
        CHECK(parse_error_line("time,row,col,value\n1,1,1,1\n") == 1);
        CHECK(parse_error_line("t,row,col,value\n1,1,1,1\n2,1,1,abc\n") == 3);
        CHECK(parse_error_line("t,row,col,value\n1,1,1,1\n2,1,1,nan\n") == 3);
        CHECK(parse_error_line("t,row,col,value\n1,1,1,1\n2,1\n") == 3);
        CHECK(parse_error_line("t,row,col,value\n1,1,1,1\n2,0,1,1\n") == 3);
        CHECK(parse_error_line("t,row,col,value\n1,1,1,1\n2,1,1,1\n1,1,1,2\n") == 4);
        CHECK(parse_error_line("t,row,col,value\n1,1,1,1\n2,1,-1,1\n") == 3);
    }
    SUBCASE("coverage and length") {
        CHECK(parse_error_line("t,row,col,value\n1,1,1,1\n2,2,1,1\n") == 0);
        CHECK(parse_error_line("t,row,col,value\n1,1,1,1\n") == 0);
        CHECK(parse_error_line("") == 1);
    }
}

TEST_CASE("model file round trip") {
    Rng rng(2);
    ModelFile model;
    model.coeffs = normalize_identification({gaussian(3, 3, rng), gaussian(2, 2, rng), false});
    model.estimator = "lasso";
    model.band = BandSpec{1, 0};
    model.lambda_A = 0.125;
    model.lambda_B = 1.0 / 3.0;
    model.tuning = "ksc";
    model.iterations = 7;
    model.converged = true;
    model.final_delta_A = 1e-8;
    model.final_delta_B = 2e-9;
    model.seed = 18446744073709551615ULL;
    std::stringstream buffer;
    write_model(buffer, model);
    CHECK(buffer.str().rfind("format mar-model/1\n", 0) == 0);
    const auto back = read_model(buffer);
    CHECK(back.coeffs.A == model.coeffs.A);
    CHECK(back.coeffs.B == model.coeffs.B);
    CHECK(back.coeffs.normalized);
    CHECK(back.estimator == "lasso");
    CHECK(back.band == model.band);
    CHECK(back.lambda_A == model.lambda_A);
    CHECK(back.lambda_B == model.lambda_B);
    CHECK(back.tuning == "ksc");
    CHECK(back.iterations == 7);
    CHECK(back.converged);
    CHECK(back.final_delta_A == model.final_delta_A);
    CHECK(back.seed == model.seed);

    ModelFile plain;
    plain.coeffs = {Matrix::Identity(2, 2), Matrix::Identity(1, 1), false};
    std::stringstream second;
    write_model(second, plain);
    const auto plain_back = read_model(second);
    CHECK_FALSE(plain_back.band.has_value());
    CHECK_FALSE(plain_back.lambda_A.has_value());
    CHECK_FALSE(plain_back.coeffs.normalized);

    SUBCASE("malformed files") {
        std::string text = buffer.str();
        auto reject = [](const std::string& body) {
            std::istringstream in(body);
            CHECK_THROWS_AS(read_model(in), ParseError);
        };
        std::stringstream again;
        write_model(again, model);
        text = again.str();
        std::string other = text;
        other.replace(0, std::string("format mar-model/1").size(), "format mar-model/2");
        reject(other);
        reject(text.substr(0, text.size() / 2));
        reject("estimator alse\n");
        reject("");
        std::string repeated = text;
        repeated.insert(repeated.find("seed"), "estimator alse\n");
        reject(repeated);
        std::string unknown = text;
        unknown.insert(unknown.find("seed"), "colour blue\n");
        reject(unknown);
    }
}

TEST_CASE("experiment configs") {
    SUBCASE("minimal config takes the defaults") {
        const auto c = parse_config(kMinimalConfig);
        CHECK(c.spec.kind == ExperimentKind::error);
        CHECK(c.spec.T_values == std::vector<std::size_t>{200});
        CHECK(c.spec.n_reps == 3);
        CHECK(c.output == "results.csv");
    }
    SUBCASE("every key is read") {
        const auto c = parse_config(
            "# comment\nexperiment = sparse\ndesign = sparse\np1 = 6\np2 = 4\nr1 = 0.3\nr2 = 0.5\n"
            "nonzero_rule = nearest\nrho = 0.9\nT = 100, 200\nestimators = alse,lasso\ntunings = ksc, mcv\n"
            "n_reps = 2\nseed = 77\nburn_in = 50\neta = 1e-7\nmax_iter = 30\nfolds = 5\nfold_scheme = contiguous\n"
            "ksc_splits = 10\nksc_alpha = 0.3\nksc_rule = largest\nn_lambda = 20\nlambda_ratio = 0.01\n"
            "output = out.csv\n");
        const auto& s = c.spec;
        CHECK(s.design == DesignKind::sparse);
        CHECK(s.r2 == 0.5);
        CHECK(s.nonzero_rule == NonzeroRule::nearest);
        CHECK(s.T_values == std::vector<std::size_t>{100, 200});
        CHECK(s.estimators == std::vector<Estimator>{Estimator::alse, Estimator::lasso});
        CHECK(s.tunings == std::vector<TuningKind>{TuningKind::ksc, TuningKind::mcv});
        CHECK(s.seed == 77);
        CHECK(s.burn_in == 50);
        CHECK(s.alse.eta == 1e-7);
        CHECK(s.alse.max_iter == 30);
        CHECK(s.tuning.folds == 5);
        CHECK(s.tuning.fold_scheme == FoldScheme::contiguous);
        CHECK(s.tuning.ksc_splits == 10);
        CHECK(s.tuning.ksc_alpha == 0.3);
        CHECK(s.tuning.ksc_rule == KscRule::largest);
        CHECK(s.tuning.n_lambda == 20);
        CHECK(s.tuning.lambda_ratio == 0.01);
        CHECK(c.output == "out.csv");
    }
    SUBCASE("invalid configs") {
        CHECK_THROWS_AS(parse_config(kMinimalConfig + "colour = blue\n"), ConfigError);
        CHECK_THROWS_AS(parse_config(kMinimalConfig + "p1 = 5\n"), ConfigError);
        CHECK_THROWS_AS(parse_config("experiment = error\np1 = 6\np2 = 4\nT = 200\nn_reps = 0\n"), ConfigError);
        CHECK_THROWS_AS(parse_config("experiment = error\np1 = 6\np2 = 4\nT = 200\n"), ConfigError);
        CHECK_THROWS_AS(parse_config("experiment = error\np1 = x\np2 = 4\nT = 200\nn_reps = 2\n"), ConfigError);
        CHECK_THROWS_AS(parse_config(kMinimalConfig + "tunings = fixed\n"), ConfigError);
        CHECK_THROWS_AS(parse_config(kMinimalConfig + "k1 = 9\n"), ConfigError);
        CHECK_THROWS_AS(parse_config(kMinimalConfig + "no equals sign\n"), ConfigError);
        CHECK_THROWS_AS(read_experiment_config("/nonexistent/config.cfg"), ConfigError);
        try {
            parse_config(kMinimalConfig + "colour = blue\n");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("line 6") != std::string::npos);
        }
    }
}

TEST_CASE("atomic text writes") {
    TempDir dir("write");
    write_text_file(dir.file("a.txt"), "first");
    write_text_file(dir.file("a.txt"), "second");
    std::ifstream in(dir.file("a.txt"));
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(text == "second");
    CHECK_THROWS(write_text_file(dir.file("missing/a.txt"), "x"));
}
