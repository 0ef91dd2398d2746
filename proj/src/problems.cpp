#include "mlp/problems.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mlp {

namespace {

double squared_norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x)
        s += v * v;
    return s;
}

std::string normalize(std::string_view name) {
    std::string s(name);
    for (char& c : s)
        if (c == '_')
            c = '-';
    return s;
}

} // namespace

BuiltinExample parse_example_name(std::string_view name) {
    const std::string s = normalize(name);
    if (s == "allen-cahn")
        return BuiltinExample::allen_cahn;
    if (s == "sine-gordon")
        return BuiltinExample::sine_gordon;
    if (s == "heat-system")
        return BuiltinExample::heat_system;
    if (s == "semilinear-bs")
        return BuiltinExample::semilinear_bs;
    throw std::invalid_argument("unknown example '" + std::string(name) +
                                "' (expected allen-cahn, sine-gordon, heat-system or semilinear-bs)");
}

std::string_view example_name(BuiltinExample ex) {
    switch (ex) {
    case BuiltinExample::allen_cahn: return "allen-cahn";
    case BuiltinExample::sine_gordon: return "sine-gordon";
    case BuiltinExample::heat_system: return "heat-system";
    case BuiltinExample::semilinear_bs: return "semilinear-bs";
    }
    throw std::invalid_argument("invalid example enum");
}

SemilinearProblem builtin_problem(BuiltinExample ex, int d) {
    if (d < 1)
        throw std::invalid_argument("builtin_problem: d must be >= 1");

    SemilinearProblem p;
    p.d = d;
    p.T = 1.0;

    const auto bowl_g = [](std::span<const double> x, std::span<double> out) {
        out[0] = 1.0 / (2.0 + 0.4 * squared_norm(x));
    };

    switch (ex) {
    case BuiltinExample::allen_cahn:
        p.k = 1;
        p.f = [](std::span<const double>, std::span<const double> y, std::span<double> out) {
            out[0] = y[0] - y[0] * y[0] * y[0];
        };
        p.g = bowl_g;
        p.flow = ScaledBrownian{std::sqrt(2.0)};
        break;
    case BuiltinExample::sine_gordon:
        p.k = 1;
        p.f = [](std::span<const double>, std::span<const double> y, std::span<double> out) {
            out[0] = std::sin(y[0]);
        };
        p.g = bowl_g;
        p.flow = ScaledBrownian{std::sqrt(2.0)};
        break;
    case BuiltinExample::heat_system:
        p.k = 2;
        p.f = [](std::span<const double>, std::span<const double> y, std::span<double> out) {
            out[0] = y[1] / (1.0 + y[1] * y[1]);
            out[1] = 2.0 * y[0] / 3.0;
        };
        p.g = [](std::span<const double> x, std::span<double> out) {
            const double n2 = squared_norm(x);
            out[0] = 1.0 / (2.0 + 0.4 * n2);
            out[1] = std::log(0.5 * (1.0 + n2));
        };
        p.flow = ScaledBrownian{std::sqrt(2.0)};
        break;
    case BuiltinExample::semilinear_bs:
        p.k = 1;
        p.f = [](std::span<const double>, std::span<const double> y, std::span<double> out) {
            out[0] = y[0] / (1.0 + y[0] * y[0]);
        };
        p.g = [](std::span<const double> x, std::span<double> out) {
            out[0] = std::log(0.5 * (1.0 + squared_norm(x)));
        };
        p.flow = UnitDriftGbm{};
        break;
    }
    return p;
}

MlpQuery default_query(BuiltinExample ex, int d) {
    if (d < 1)
        throw std::invalid_argument("default_query: d must be >= 1");
    MlpQuery q;
    q.t = 0.0;
    q.x.assign(d, ex == BuiltinExample::semilinear_bs ? 50.0 : 0.0);
    q.r = ex == BuiltinExample::allen_cahn ? TruncationRadius::finite(4.0)
                                           : TruncationRadius::infinite();
    q.n = 0;
    q.M = 1;
    return q;
}

std::string_view provenance_name(Provenance p) {
    switch (p) {
    case Provenance::paper_ds: return "paper-ds";
    case Provenance::paper_mlp: return "paper-mlp";
    case Provenance::self_computed: return "self";
    }
    throw std::invalid_argument("invalid provenance enum");
}

Provenance parse_provenance(std::string_view name) {
    const std::string s = normalize(name);
    if (s == "ds" || s == "paper-ds")
        return Provenance::paper_ds;
    if (s == "mlp" || s == "paper-mlp")
        return Provenance::paper_mlp;
    if (s == "self")
        return Provenance::self_computed;
    throw std::invalid_argument("unknown provenance '" + std::string(name) + "'");
}

ReferenceTable ReferenceTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open reference fixture file: " + path);

    ReferenceTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto at = [&] { return path + ":" + std::to_string(lineno); };
        std::istringstream ss(line);
        std::string name;
        if (!(ss >> name) || name.front() == '#')
            continue;
        ReferenceSolution ref;
        int k = 0;
        std::string prov;
        if (!(ss >> ref.d >> prov >> k) || ref.d < 1 || k < 1)
            throw std::runtime_error("malformed fixture record at " + at());
        ref.example = parse_example_name(name);
        ref.provenance = parse_provenance(prov);
        ref.value.resize(k);
        for (int i = 0; i < k; ++i)
            if (!(ss >> ref.value[i]))
                throw std::runtime_error("missing value component at " + at());
        double extra;
        if (ss >> extra)
            throw std::runtime_error("trailing fields at " + at());
        table.entries_.push_back(std::move(ref));
    }
    return table;
}

bool ReferenceTable::has(BuiltinExample ex, int d, Provenance p) const {
    for (const auto& e : entries_)
        if (e.example == ex && e.d == d && e.provenance == p)
            return true;
    return false;
}

ReferenceSolution ReferenceTable::lookup(BuiltinExample ex, int d, Provenance p) const {
    for (const auto& e : entries_)
        if (e.example == ex && e.d == d && e.provenance == p)
            return e;
    throw std::runtime_error("missing reference fixture for " + std::string(example_name(ex)) +
                             " d=" + std::to_string(d) + " provenance=" +
                             std::string(provenance_name(p)));
}

} // namespace mlp
