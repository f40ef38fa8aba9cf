#include "mar/io.hpp"

#include "mar/errors.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace mar {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(s);
    while (std::getline(in, field, sep)) out.push_back(trim(field));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

double to_double(const std::string& text, std::size_t line, const std::string& what) {
    if (text.empty()) throw ParseError("empty " + what, line);
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || errno == ERANGE) {
        throw ParseError("invalid " + what + " '" + text + "'", line);
    }
    return v;
}

double to_finite(const std::string& text, std::size_t line, const std::string& what) {
    const double v = to_double(text, line, what);
    if (!std::isfinite(v)) throw ParseError(what + " '" + text + "' is not finite", line);
    return v;
}

long long to_integer(const std::string& text, std::size_t line, const std::string& what) {
    if (text.empty()) throw ParseError("empty " + what, line);
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(text.c_str(), &end, 10);
    if (end != text.c_str() + text.size() || errno == ERANGE) {
        throw ParseError("invalid " + what + " '" + text + "'", line);
    }
    return v;
}

std::uint64_t to_unsigned(const std::string& text, std::size_t line, const std::string& what) {
    if (text.empty() || text.front() == '-') throw ParseError("invalid " + what + " '" + text + "'", line);
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
    if (end != text.c_str() + text.size() || errno == ERANGE) {
        throw ParseError("invalid " + what + " '" + text + "'", line);
    }
    return v;
}

std::string number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "' for reading", 0);
    return in;
}

void write_matrix(std::ostream& out, const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << number(m(i, j));
        out << '\n';
    }
}

Matrix read_matrix(std::istream& in, Eigen::Index rows, Eigen::Index cols, std::size_t& line, const std::string& name) {
    Matrix m(rows, cols);
    std::string text;
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (!std::getline(in, text)) throw ParseError("unexpected end of file inside matrix " + name, line);
        ++line;
        std::istringstream fields(text);
        std::string field;
        Eigen::Index j = 0;
        while (fields >> field) {
            if (j == cols) throw ParseError("too many entries in a row of " + name, line);
            m(i, j++) = to_finite(field, line, "entry of " + name);
        }
        if (j != cols) throw ParseError("expected " + std::to_string(cols) + " entries in a row of " + name, line);
    }
    return m;
}

}  // namespace

MatrixSeries read_series_csv(std::istream& in) {
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (!trim(text).empty()) break;
    }
    if (line == 0 || trim(text) != "t,row,col,value") {
        throw ParseError("expected header 't,row,col,value'", line == 0 ? 1 : line);
    }

    struct Entry {
        long long t, row, col;
        double value;
        std::size_t line;
    };
    std::vector<Entry> entries;
    long long T = 0, p1 = 0, p2 = 0;
    while (std::getline(in, text)) {
        ++line;
        if (trim(text).empty()) continue;
        const auto fields = split(text, ',');
        if (fields.size() != 4) throw ParseError("expected 4 fields, found " + std::to_string(fields.size()), line);
        Entry e{to_integer(fields[0], line, "t"), to_integer(fields[1], line, "row"), to_integer(fields[2], line, "col"),
                to_finite(fields[3], line, "value"), line};
        if (e.t < 1 || e.row < 1 || e.col < 1) throw ParseError("indices must be positive", line);
        T = std::max(T, e.t);
        p1 = std::max(p1, e.row);
        p2 = std::max(p2, e.col);
        entries.push_back(e);
    }
    if (entries.empty()) throw ParseError("series file has no data rows", line);
    const long long cells = T * p1 * p2;
    if (static_cast<long long>(entries.size()) < cells) {
        throw ParseError("incomplete coverage: T = " + std::to_string(T) + ", p1 = " + std::to_string(p1) +
                             ", p2 = " + std::to_string(p2) + " needs " + std::to_string(cells) +
                             " entries, found " + std::to_string(entries.size()),
                         0);
    }
    std::vector<Matrix> data(static_cast<std::size_t>(T), Matrix::Zero(p1, p2));
    std::vector<char> seen(static_cast<std::size_t>(cells), 0);
    for (const auto& e : entries) {
        const auto index = static_cast<std::size_t>(((e.t - 1) * p1 + (e.row - 1)) * p2 + (e.col - 1));
        if (seen[index]) {
            throw ParseError("duplicate entry for (t, row, col) = (" + std::to_string(e.t) + ", " +
                                 std::to_string(e.row) + ", " + std::to_string(e.col) + ")",
                             e.line);
        }
        seen[index] = 1;
        data[static_cast<std::size_t>(e.t - 1)](e.row - 1, e.col - 1) = e.value;
    }
    if (T < 2) throw ParseError("series needs at least 2 time points", 0);
    return MatrixSeries(std::move(data));
}

MatrixSeries read_series_file(const std::string& path) {
    auto in = open_input(path);
    return read_series_csv(in);
}

void write_series_csv(std::ostream& out, const MatrixSeries& series) {
    out << "t,row,col,value\n";
    for (std::size_t t = 0; t < series.length(); ++t) {
        const Matrix& y = series[t];
        for (Eigen::Index i = 0; i < y.rows(); ++i) {
            for (Eigen::Index j = 0; j < y.cols(); ++j) {
                out << t + 1 << ',' << i + 1 << ',' << j + 1 << ',' << number(y(i, j)) << '\n';
            }
        }
    }
}

void write_series_file(const std::string& path, const MatrixSeries& series) {
    std::ostringstream out;
    write_series_csv(out, series);
    write_text_file(path, out.str());
}

void write_model(std::ostream& out, const ModelFile& model) {
    out << "format " << kModelFormat << '\n';
    out << "estimator " << model.estimator << '\n';
    out << "seed " << model.seed << '\n';
    out << "p1 " << model.coeffs.A.rows() << '\n';
    out << "p2 " << model.coeffs.B.rows() << '\n';
    out << "normalized " << (model.coeffs.normalized ? 1 : 0) << '\n';
    out << "iterations " << model.iterations << '\n';
    out << "converged " << (model.converged ? 1 : 0) << '\n';
    out << "final_delta_A " << number(model.final_delta_A) << '\n';
    out << "final_delta_B " << number(model.final_delta_B) << '\n';
    if (model.band) out << "band " << model.band->k1 << ' ' << model.band->k2 << '\n';
    if (model.lambda_A) out << "lambda_A " << number(*model.lambda_A) << '\n';
    if (model.lambda_B) out << "lambda_B " << number(*model.lambda_B) << '\n';
    if (!model.tuning.empty()) out << "tuning " << model.tuning << '\n';
    out << "A\n";
    write_matrix(out, model.coeffs.A);
    out << "B\n";
    write_matrix(out, model.coeffs.B);
    out << "end\n";
}

void write_model_file(const std::string& path, const ModelFile& model) {
    std::ostringstream out;
    write_model(out, model);
    write_text_file(path, out.str());
}

ModelFile read_model(std::istream& in) {
    std::string text;
    std::size_t line = 0;
    auto next = [&]() -> bool {
        while (std::getline(in, text)) {
            ++line;
            text = trim(text);
            if (!text.empty()) return true;
        }
        return false;
    };
    if (!next()) throw ParseError("empty model file", 1);
    {
        std::istringstream head(text);
        std::string key, version;
        head >> key >> version;
        if (key != "format") throw ParseError("model file must start with a format line", line);
        if (version != kModelFormat) {
            throw ParseError("unsupported model format '" + version + "' (expected " + kModelFormat + ")", line);
        }
    }

    ModelFile model;
    std::optional<long long> p1, p2;
    std::set<std::string> seen;
    bool have_a = false, have_b = false;
    while (next()) {
        if (text == "end") {
            if (!have_a || !have_b) throw ParseError("model file lacks coefficient matrices", line);
            return model;
        }
        if (text == "A" || text == "B") {
            if (!p1 || !p2) throw ParseError("dimensions must precede the matrices", line);
            if (text == "A") {
                model.coeffs.A = read_matrix(in, *p1, *p1, line, "A");
                have_a = true;
            } else {
                model.coeffs.B = read_matrix(in, *p2, *p2, line, "B");
                have_b = true;
            }
            continue;
        }
        std::istringstream fields(text);
        std::string key;
        fields >> key;
        std::vector<std::string> values;
        for (std::string v; fields >> v;) values.push_back(v);
        if (!seen.insert(key).second) throw ParseError("repeated key '" + key + "'", line);
        auto one = [&]() -> const std::string& {
            if (values.size() != 1) throw ParseError("key '" + key + "' takes exactly one value", line);
            return values.front();
        };
        if (key == "estimator") {
            model.estimator = one();
        } else if (key == "seed") {
            model.seed = to_unsigned(one(), line, "seed");
        } else if (key == "p1" || key == "p2") {
            const long long p = to_integer(one(), line, key);
            if (p < 1) throw ParseError(key + " must be positive", line);
            (key == "p1" ? p1 : p2) = p;
        } else if (key == "normalized") {
            model.coeffs.normalized = to_integer(one(), line, key) != 0;
        } else if (key == "iterations") {
            model.iterations = static_cast<int>(to_integer(one(), line, key));
        } else if (key == "converged") {
            model.converged = to_integer(one(), line, key) != 0;
        } else if (key == "final_delta_A") {
            model.final_delta_A = to_double(one(), line, key);
        } else if (key == "final_delta_B") {
            model.final_delta_B = to_double(one(), line, key);
        } else if (key == "band") {
            if (values.size() != 2) throw ParseError("band takes two values", line);
            model.band = BandSpec{static_cast<int>(to_integer(values[0], line, "k1")),
                                  static_cast<int>(to_integer(values[1], line, "k2"))};
        } else if (key == "lambda_A") {
            model.lambda_A = to_finite(one(), line, key);
        } else if (key == "lambda_B") {
            model.lambda_B = to_finite(one(), line, key);
        } else if (key == "tuning") {
            model.tuning = one();
        } else {
            throw ParseError("unknown key '" + key + "'", line);
        }
    }
    throw ParseError("model file is missing its 'end' line", line);
}

ModelFile read_model_file(const std::string& path) {
    auto in = open_input(path);
    return read_model(in);
}

ExperimentConfig parse_experiment_config(std::istream& in) {
    ExperimentConfig config;
    ExperimentSpec& spec = config.spec;
    std::map<std::string, std::size_t> seen;
    std::string text;
    std::size_t line = 0;

    // Config errors are reported with their line, but as ConfigError so the
    // CLI maps them to the usage exit code.
    auto fail = [&](const std::string& what) -> void {
        throw ConfigError("line " + std::to_string(line) + ": " + what);
    };
    auto as_int = [&](const std::string& v) {
        try {
            return static_cast<int>(to_integer(v, line, "integer"));
        } catch (const ParseError&) {
            fail("invalid integer '" + v + "'");
        }
        return 0;
    };
    auto as_double = [&](const std::string& v) {
        try {
            return to_finite(v, line, "number");
        } catch (const ParseError&) {
            fail("invalid number '" + v + "'");
        }
        return 0.0;
    };
    auto as_list = [&](const std::string& v) {
        auto items = split(v, ',');
        for (const auto& item : items) {
            if (item.empty()) fail("empty item in list '" + v + "'");
        }
        return items;
    };

    while (std::getline(in, text)) {
        ++line;
        const auto hash = text.find('#');
        if (hash != std::string::npos) text.erase(hash);
        text = trim(text);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) fail("expected 'key = value'");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key.empty() || value.empty()) fail("expected 'key = value'");
        if (!seen.emplace(key, line).second) fail("repeated key '" + key + "'");
        try {
            if (key == "experiment") {
                spec.kind = parse_experiment_kind(value);
            } else if (key == "design") {
                spec.design = parse_design_kind(value);
            } else if (key == "p1") {
                spec.p1 = as_int(value);
            } else if (key == "p2") {
                spec.p2 = as_int(value);
            } else if (key == "k1") {
                spec.band.k1 = as_int(value);
            } else if (key == "k2") {
                spec.band.k2 = as_int(value);
            } else if (key == "r1") {
                spec.r1 = as_double(value);
            } else if (key == "r2") {
                spec.r2 = as_double(value);
            } else if (key == "nonzero_rule") {
                if (value == "floor") spec.nonzero_rule = NonzeroRule::floor;
                else if (value == "nearest") spec.nonzero_rule = NonzeroRule::nearest;
                else fail("nonzero_rule must be floor or nearest");
            } else if (key == "rho") {
                spec.rho = as_double(value);
            } else if (key == "T") {
                spec.T_values.clear();
                for (const auto& item : as_list(value)) {
                    const int T = as_int(item);
                    if (T < 1) fail("T values must be positive");
                    spec.T_values.push_back(static_cast<std::size_t>(T));
                }
            } else if (key == "estimators") {
                spec.estimators.clear();
                for (const auto& item : as_list(value)) spec.estimators.push_back(parse_estimator(item));
            } else if (key == "tunings") {
                spec.tunings.clear();
                for (const auto& item : as_list(value)) {
                    const auto kind = parse_tuning_kind(item);
                    if (kind == TuningKind::fixed) fail("fixed tuning is not available in experiments");
                    spec.tunings.push_back(kind);
                }
            } else if (key == "n_reps") {
                spec.n_reps = as_int(value);
            } else if (key == "seed") {
                try {
                    spec.seed = to_unsigned(value, line, "seed");
                } catch (const ParseError&) {
                    fail("invalid seed '" + value + "'");
                }
            } else if (key == "burn_in") {
                const int b = as_int(value);
                if (b < 0) fail("burn_in must be non-negative");
                spec.burn_in = static_cast<std::size_t>(b);
            } else if (key == "eta") {
                spec.alse.eta = as_double(value);
            } else if (key == "max_iter") {
                spec.alse.max_iter = as_int(value);
            } else if (key == "folds") {
                spec.tuning.folds = as_int(value);
            } else if (key == "fold_scheme") {
                if (value == "random") spec.tuning.fold_scheme = FoldScheme::random;
                else if (value == "contiguous") spec.tuning.fold_scheme = FoldScheme::contiguous;
                else fail("fold_scheme must be random or contiguous");
            } else if (key == "ksc_splits") {
                spec.tuning.ksc_splits = as_int(value);
            } else if (key == "ksc_alpha") {
                spec.tuning.ksc_alpha = as_double(value);
            } else if (key == "ksc_rule") {
                if (value == "smallest") spec.tuning.ksc_rule = KscRule::smallest;
                else if (value == "largest") spec.tuning.ksc_rule = KscRule::largest;
                else fail("ksc_rule must be smallest or largest");
            } else if (key == "n_lambda") {
                spec.tuning.n_lambda = as_int(value);
            } else if (key == "lambda_ratio") {
                spec.tuning.lambda_ratio = as_double(value);
            } else if (key == "output") {
                config.output = value;
            } else {
                fail("unknown key '" + key + "'");
            }
        } catch (const ConfigError& e) {
            const std::string what = e.what();
            if (what.rfind("line ", 0) == 0) throw;
            fail(what);
        }
    }
    for (const char* required : {"experiment", "p1", "p2", "T", "n_reps"}) {
        if (!seen.count(required)) throw ConfigError(std::string("missing required key '") + required + "'");
    }
    spec.validate();
    for (const auto kind : spec.tunings) {
        TuningMethod t = spec.tuning;
        t.kind = kind;
        t.validate();
    }
    return config;
}

ExperimentConfig read_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    return parse_experiment_config(in);
}

void write_text_file(const std::string& path, const std::string& contents) {
    const std::string temp = path + ".tmp";
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open '" + temp + "' for writing");
        out << contents;
        out.close();
        if (!out) throw Error("failed writing '" + temp + "'");
    }
    std::error_code ec;
    std::filesystem::rename(temp, path, ec);
    if (ec) {
        std::filesystem::remove(temp, ec);
        throw Error("cannot move output into place at '" + path + "'");
    }
}

}  // namespace mar
