#include "mlp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace mlp {

namespace {

std::string dtos(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double euclidean_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v)
        s += x * x;
    return std::sqrt(s);
}

// Runs body(0..count-1) on up to `workers` threads. Slot-indexed writes keep
// the result independent of scheduling; the first worker exception aborts.
void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& body) {
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    const std::size_t pool =
        std::min<std::size_t>(static_cast<std::size_t>(workers), count);
    {
        std::vector<std::jthread> threads;
        threads.reserve(pool);
        for (std::size_t w = 0; w < pool; ++w) {
            threads.emplace_back([&] {
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= count)
                        return;
                    try {
                        body(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!first_error)
                            first_error = std::current_exception();
                        next.store(count); // drain remaining work
                        return;
                    }
                }
            });
        }
    }
    if (first_error)
        std::rethrow_exception(first_error);
}

SemilinearProblem make_problem(const ExperimentSpec& spec, int d) {
    SemilinearProblem p = builtin_problem(spec.example, d);
    if (spec.em_steps_override) {
        if (*spec.em_steps_override < 1)
            throw std::invalid_argument("em steps override must be >= 1");
        // Replace the exact flow by the Euler-Maruyama discretization of the
        // same SDE.
        GenericSde sde;
        sde.em_steps_per_unit_time = *spec.em_steps_override;
        if (const auto* sb = std::get_if<ScaledBrownian>(&p.flow)) {
            const double scale = sb->scale;
            sde.mu = [](std::span<const double>, std::span<double> out) {
                std::fill(out.begin(), out.end(), 0.0);
            };
            sde.sigma = [scale](std::span<const double> x, std::span<double> out) {
                const std::size_t d = x.size();
                std::fill(out.begin(), out.end(), 0.0);
                for (std::size_t i = 0; i < d; ++i)
                    out[i * d + i] = scale;
            };
        } else {
            sde.mu = [](std::span<const double> x, std::span<double> out) {
                std::copy(x.begin(), x.end(), out.begin());
            };
            sde.sigma = [](std::span<const double> x, std::span<double> out) {
                const std::size_t d = x.size();
                std::fill(out.begin(), out.end(), 0.0);
                for (std::size_t i = 0; i < d; ++i)
                    out[i * d + i] = x[i];
            };
        }
        p.flow = std::move(sde);
    }
    return p;
}

MlpQuery make_query(const ExperimentSpec& spec, const SemilinearProblem& problem, int d, int n) {
    MlpQuery q = default_query(spec.example, d);
    q.n = n;
    q.M = static_cast<std::uint64_t>(n);
    if (spec.t_override) {
        if (!(*spec.t_override >= 0.0 && *spec.t_override <= problem.T))
            throw std::invalid_argument("t override outside [0, T]");
        q.t = *spec.t_override;
    }
    if (spec.r_override)
        q.r = *spec.r_override;
    return q;
}

void validate_spec(const ExperimentSpec& spec) {
    if (spec.dims.empty())
        throw std::invalid_argument("experiment: dimension list is empty");
    for (int d : spec.dims)
        if (d < 1)
            throw std::invalid_argument("experiment: dimensions must be >= 1");
    if (spec.iterations.empty())
        throw std::invalid_argument("experiment: iteration list is empty");
    for (int n : spec.iterations)
        if (n < 1)
            throw std::invalid_argument("experiment: iteration indices must be >= 1");
    if (spec.runs_per_cell < 1)
        throw std::invalid_argument("experiment: runs per cell must be >= 1");
    if (spec.workers < 1)
        throw std::invalid_argument("experiment: worker count must be >= 1");
}

struct Realization {
    Estimate estimate;
    double seconds = 0.0;
};

Realization run_one(const SemilinearProblem& problem, const MlpQuery& query, std::int64_t root,
                    std::uint64_t seed, bool timed) {
    Realization r;
    if (timed) {
        const auto begin = std::chrono::steady_clock::now();
        r.estimate = mlp_estimate(problem, query, MultiIndexKey(root), seed);
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
    } else {
        r.estimate = mlp_estimate(problem, query, MultiIndexKey(root), seed);
    }
    return r;
}

} // namespace

double relative_l2_error(const std::vector<std::vector<double>>& samples,
                         std::span<const double> ref) {
    if (samples.empty())
        throw std::invalid_argument("relative_l2_error: need at least one sample");
    const double ref_norm = euclidean_norm(ref);
    if (!(ref_norm > 0.0))
        throw std::invalid_argument("relative_l2_error: reference norm must be positive");
    double acc = 0.0;
    for (const auto& v : samples) {
        if (v.size() != ref.size())
            throw std::invalid_argument("relative_l2_error: sample dimension mismatch");
        double sq = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double diff = v[i] - ref[i];
            sq += diff * diff;
        }
        acc += sq;
    }
    return std::sqrt(acc / static_cast<double>(samples.size())) / ref_norm;
}

ReferenceSolution self_reference(const ExperimentSpec& spec, int d) {
    const SelfReference* mode = std::get_if<SelfReference>(&spec.reference);
    const SelfReference cfg = mode ? *mode : SelfReference{};
    if (cfg.runs_ref < 1)
        throw std::invalid_argument("self reference: runs_ref must be >= 1");
    for (int n : spec.iterations)
        if (cfg.n_ref < n)
            throw std::invalid_argument("self reference: n_ref must cover the whole n list");

    const SemilinearProblem problem = make_problem(spec, d);
    const MlpQuery query = make_query(spec, problem, d, cfg.n_ref);

    std::vector<std::vector<double>> values(cfg.runs_ref);
    parallel_for(values.size(), spec.workers, [&](std::size_t j) {
        const std::int64_t root = -static_cast<std::int64_t>(j) - 1;
        values[j] = run_one(problem, query, root, spec.master_seed, false).estimate.value;
    });

    ReferenceSolution ref;
    ref.example = spec.example;
    ref.d = d;
    ref.provenance = Provenance::self_computed;
    ref.value.assign(problem.k, 0.0);
    for (const auto& v : values)
        for (int i = 0; i < problem.k; ++i)
            ref.value[i] += v[i];
    for (int i = 0; i < problem.k; ++i)
        ref.value[i] /= static_cast<double>(cfg.runs_ref);
    return ref;
}

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec, const ReferenceTable* refs,
                                      std::vector<CellRealizations>* realizations) {
    validate_spec(spec);

    std::vector<int> dims = spec.dims;
    std::sort(dims.begin(), dims.end());
    dims.erase(std::unique(dims.begin(), dims.end()), dims.end());
    std::vector<int> iterations = spec.iterations;
    std::sort(iterations.begin(), iterations.end());
    iterations.erase(std::unique(iterations.begin(), iterations.end()), iterations.end());

    // One reference per dimension.
    std::map<int, ReferenceSolution> reference;
    if (const auto* paper = std::get_if<PaperReference>(&spec.reference)) {
        if (refs == nullptr)
            throw std::invalid_argument("experiment: fixture table required for this reference mode");
        for (int d : dims)
            reference[d] = refs->lookup(spec.example, d, paper->which);
    } else {
        for (int d : dims)
            reference[d] = self_reference(spec, d);
    }

    std::vector<SemilinearProblem> problems;
    problems.reserve(dims.size());
    for (int d : dims)
        problems.push_back(make_problem(spec, d));

    struct Cell {
        std::size_t dim_index;
        int d, n;
    };
    std::vector<Cell> cells;
    for (std::size_t di = 0; di < dims.size(); ++di)
        for (int n : iterations)
            cells.push_back({di, dims[di], n});

    const std::size_t runs = static_cast<std::size_t>(spec.runs_per_cell);
    std::vector<Realization> results(cells.size() * runs);
    parallel_for(results.size(), spec.workers, [&](std::size_t task) {
        const Cell& cell = cells[task / runs];
        const std::size_t run = task % runs;
        const SemilinearProblem& problem = problems[cell.dim_index];
        const MlpQuery query = make_query(spec, problem, cell.d, cell.n);
        const bool timed = spec.measure_timing && run == 0;
        results[task] =
            run_one(problem, query, static_cast<std::int64_t>(run), spec.master_seed, timed);
    });

    std::vector<ResultRow> rows;
    rows.reserve(cells.size());
    if (realizations)
        realizations->clear();
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const Cell& cell = cells[c];
        const ReferenceSolution& ref = reference.at(cell.d);
        std::vector<std::vector<double>> values(runs);
        for (std::size_t j = 0; j < runs; ++j)
            values[j] = results[c * runs + j].estimate.value;

        ResultRow row;
        row.d = cell.d;
        row.n = cell.n;
        row.value = values.front();
        row.reference = ref.value;
        row.provenance = ref.provenance;
        row.rel_l2_error = relative_l2_error(values, ref.value);
        row.gaussian_scalars = results[c * runs].estimate.counters.gaussian_scalars;
        row.uniforms = results[c * runs].estimate.counters.uniforms;
        row.runtime_seconds = spec.measure_timing ? results[c * runs].seconds : 0.0;
        rows.push_back(std::move(row));

        if (realizations)
            realizations->push_back({cell.d, cell.n, std::move(values)});
    }
    return rows;
}

void emit_csv(const std::vector<ResultRow>& rows, const std::string& path,
              std::optional<int> workers_note) {
    if (rows.empty())
        throw std::invalid_argument("emit_csv: no rows");
    const std::size_t k = rows.front().value.size();
    for (const auto& r : rows)
        if (r.value.size() != k || r.reference.size() != k)
            throw std::invalid_argument("emit_csv: inconsistent value dimensions");

    std::ofstream out(path, std::ios::binary); // fixed \n endings
    if (!out)
        throw std::runtime_error("emit_csv: cannot open " + path);

    if (workers_note)
        out << "# workers=" << *workers_note << "\n";
    out << "d,n";
    if (k == 1) {
        out << ",value,reference";
    } else {
        for (std::size_t i = 1; i <= k; ++i)
            out << ",value_" << i;
        for (std::size_t i = 1; i <= k; ++i)
            out << ",reference_" << i;
    }
    out << ",provenance,rel_l2_error,gaussian_scalars,uniforms,runtime_seconds\n";
    for (const auto& r : rows) {
        out << r.d << ',' << r.n;
        for (double v : r.value)
            out << ',' << dtos(v);
        for (double v : r.reference)
            out << ',' << dtos(v);
        out << ',' << provenance_name(r.provenance) << ',' << dtos(r.rel_l2_error) << ','
            << r.gaussian_scalars << ',' << r.uniforms << ',' << dtos(r.runtime_seconds) << "\n";
    }
    if (!out)
        throw std::runtime_error("emit_csv: write failed for " + path);
}

std::vector<ResultRow> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("read_csv: cannot open " + path);

    const auto split = [](const std::string& line) {
        std::vector<std::string> fields;
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                fields.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        fields.push_back(cur);
        return fields;
    };

    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#')
            continue;
        header = split(line);
        break;
    }
    if (header.size() < 7 || header[0] != "d" || header[1] != "n")
        throw std::runtime_error("read_csv: unrecognized header in " + path);
    std::size_t k = 0;
    for (const auto& h : header)
        if (h.rfind("value", 0) == 0)
            ++k;
    if (k == 0 || header.size() != 2 + 2 * k + 5)
        throw std::runtime_error("read_csv: unrecognized header in " + path);

    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#')
            continue;
        const auto f = split(line);
        if (f.size() != header.size())
            throw std::runtime_error("read_csv: malformed row in " + path);
        ResultRow r;
        std::size_t i = 0;
        r.d = std::stoi(f[i++]);
        r.n = std::stoi(f[i++]);
        for (std::size_t j = 0; j < k; ++j)
            r.value.push_back(std::stod(f[i++]));
        for (std::size_t j = 0; j < k; ++j)
            r.reference.push_back(std::stod(f[i++]));
        r.provenance = parse_provenance(f[i++]);
        r.rel_l2_error = std::stod(f[i++]);
        r.gaussian_scalars = std::stoull(f[i++]);
        r.uniforms = std::stoull(f[i++]);
        r.runtime_seconds = std::stod(f[i++]);
        rows.push_back(std::move(r));
    }
    return rows;
}

namespace {

std::string series_path(const std::string& base, int d) {
    const std::size_t dot = base.find_last_of("./\\");
    const bool has_ext = dot != std::string::npos && base[dot] == '.';
    const std::string stem = has_ext ? base.substr(0, dot) : base;
    return stem + "_d" + std::to_string(d) + ".dat";
}

} // namespace

void emit_plot(const std::vector<ResultRow>& rows, const std::string& path) {
    if (rows.empty())
        throw std::invalid_argument("emit_plot: no rows");

    // Group rows into one series per dimension, preserving row order.
    std::vector<int> dims;
    for (const auto& r : rows)
        if (std::find(dims.begin(), dims.end(), r.d) == dims.end())
            dims.push_back(r.d);

    for (int d : dims) {
        const std::string sp = series_path(path, d);
        std::ofstream out(sp, std::ios::binary);
        if (!out)
            throw std::runtime_error("emit_plot: cannot open " + sp);
        out << "# gaussian_scalars rel_l2_error (d=" << d << ")\n";
        for (const auto& r : rows)
            if (r.d == d)
                out << r.gaussian_scalars << ' ' << dtos(r.rel_l2_error) << "\n";
    }

    // Log-log chart of error against Gaussian draw count.
    struct Pt {
        double x, y;
    };
    std::map<int, std::vector<Pt>> series;
    double lx0 = 1e300, lx1 = -1e300, ly0 = 1e300, ly1 = -1e300;
    for (const auto& r : rows) {
        if (r.gaussian_scalars == 0 || !(r.rel_l2_error > 0.0))
            continue; // not representable on log axes
        const double lx = std::log10(static_cast<double>(r.gaussian_scalars));
        const double ly = std::log10(r.rel_l2_error);
        series[r.d].push_back({lx, ly});
        lx0 = std::min(lx0, lx);
        lx1 = std::max(lx1, lx);
        ly0 = std::min(ly0, ly);
        ly1 = std::max(ly1, ly);
    }

    std::ofstream svg(path, std::ios::binary);
    if (!svg)
        throw std::runtime_error("emit_plot: cannot open " + path);

    const int width = 760, height = 540;
    const double ml = 80, mr = 170, mt = 40, mb = 64;
    const double pw = width - ml - mr, ph = height - mt - mb;

    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    if (series.empty()) {
        svg << "<text x=\"" << width / 2 << "\" y=\"" << height / 2
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\">no positive error data</text>\n"
            << "</svg>\n";
        return;
    }

    lx0 = std::floor(lx0);
    lx1 = std::ceil(lx1 + 1e-9);
    ly0 = std::floor(ly0);
    ly1 = std::ceil(ly1 + 1e-9);
    if (lx1 == lx0)
        lx1 += 1.0;
    if (ly1 == ly0)
        ly1 += 1.0;
    const auto px = [&](double lx) { return ml + (lx - lx0) / (lx1 - lx0) * pw; };
    const auto py = [&](double ly) { return mt + (1.0 - (ly - ly0) / (ly1 - ly0)) * ph; };

    // Decade grid and tick labels.
    svg << "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
    for (int e = static_cast<int>(lx0); e <= static_cast<int>(lx1); ++e)
        svg << "<line x1=\"" << px(e) << "\" y1=\"" << mt << "\" x2=\"" << px(e) << "\" y2=\""
            << mt + ph << "\"/>\n";
    for (int e = static_cast<int>(ly0); e <= static_cast<int>(ly1); ++e)
        svg << "<line x1=\"" << ml << "\" y1=\"" << py(e) << "\" x2=\"" << ml + pw << "\" y2=\""
            << py(e) << "\"/>\n";
    svg << "</g>\n";
    svg << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#333333\">\n";
    for (int e = static_cast<int>(lx0); e <= static_cast<int>(lx1); ++e)
        svg << "<text x=\"" << px(e) << "\" y=\"" << mt + ph + 18
            << "\" text-anchor=\"middle\">1e" << e << "</text>\n";
    for (int e = static_cast<int>(ly0); e <= static_cast<int>(ly1); ++e)
        svg << "<text x=\"" << ml - 8 << "\" y=\"" << py(e) + 4
            << "\" text-anchor=\"end\">1e" << e << "</text>\n";
    svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 16
        << "\" text-anchor=\"middle\">scalar Gaussian draws per realization</text>\n";
    svg << "<text x=\"20\" y=\"" << mt + ph / 2
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " << mt + ph / 2
        << ")\">relative L2 error</text>\n";
    svg << "</g>\n";
    svg << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"#333333\"/>\n";

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                    "#17becf"};
    std::size_t si = 0;
    double legend_y = mt + 10;
    for (const auto& [d, pts] : series) {
        const char* color = palette[si % (sizeof palette / sizeof palette[0])];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (const Pt& p : pts)
            svg << px(p.x) << ',' << py(p.y) << ' ';
        svg << "\"/>\n";
        for (const Pt& p : pts)
            svg << "<circle cx=\"" << px(p.x) << "\" cy=\"" << py(p.y) << "\" r=\"3\" fill=\""
                << color << "\"/>\n";
        svg << "<line x1=\"" << ml + pw + 14 << "\" y1=\"" << legend_y << "\" x2=\""
            << ml + pw + 40 << "\" y2=\"" << legend_y << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << ml + pw + 46 << "\" y=\"" << legend_y + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\">d = " << d << "</text>\n";
        legend_y += 20;
        ++si;
    }
    svg << "</svg>\n";
    if (!svg)
        throw std::runtime_error("emit_plot: write failed for " + path);
}

std::string render_table(const std::vector<ResultRow>& rows) {
    const auto value_text = [](std::span<const double> v, int decimals) {
        char buf[64];
        std::string s;
        if (v.size() == 1) {
            std::snprintf(buf, sizeof buf, "%.*f", decimals, v[0]);
            return std::string(buf);
        }
        s = "(";
        for (std::size_t i = 0; i < v.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.*f", decimals, v[i]);
            s += buf;
            if (i + 1 < v.size())
                s += ", ";
        }
        s += ")";
        return s;
    };

    std::vector<std::vector<std::string>> grid;
    grid.push_back({"d", "n", "value", "reference", "rel_L2_error", "gaussian_scalars", "uniforms",
                    "runtime_s"});
    for (const auto& r : rows) {
        char err[32], rt[32];
        std::snprintf(err, sizeof err, "%.6f", r.rel_l2_error);
        std::snprintf(rt, sizeof rt, "%.5f", r.runtime_seconds);
        grid.push_back({std::to_string(r.d), std::to_string(r.n), value_text(r.value, 5),
                        value_text(r.reference, 5) + " [" +
                            std::string(provenance_name(r.provenance)) + "]",
                        err, std::to_string(r.gaussian_scalars), std::to_string(r.uniforms), rt});
    }

    std::vector<std::size_t> widths(grid.front().size(), 0);
    for (const auto& row : grid)
        for (std::size_t c = 0; c < row.size(); ++c)
            widths[c] = std::max(widths[c], row[c].size());

    std::ostringstream out;
    for (std::size_t rix = 0; rix < grid.size(); ++rix) {
        for (std::size_t c = 0; c < grid[rix].size(); ++c) {
            out << std::string(widths[c] - grid[rix][c].size(), ' ') << grid[rix][c];
            out << (c + 1 < grid[rix].size() ? "  " : "");
        }
        out << "\n";
        if (rix == 0) {
            std::size_t total = 0;
            for (std::size_t w : widths)
                total += w;
            out << std::string(total + 2 * (widths.size() - 1), '-') << "\n";
        }
    }
    return out.str();
}

std::vector<std::string> timing_monotonicity_warnings(const std::vector<ResultRow>& rows) {
    std::vector<std::string> warnings;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& prev = rows[i - 1];
        const auto& cur = rows[i];
        if (cur.d != prev.d || cur.n != prev.n + 1 || prev.n < 4)
            continue;
        if (prev.runtime_seconds <= 0.0 || cur.runtime_seconds <= 0.0)
            continue;
        if (cur.runtime_seconds <= prev.runtime_seconds) {
            std::ostringstream w;
            w << "runtime not increasing at d=" << cur.d << " between n=" << prev.n << " ("
              << prev.runtime_seconds << "s) and n=" << cur.n << " (" << cur.runtime_seconds
              << "s)";
            warnings.push_back(w.str());
        }
    }
    return warnings;
}

} // namespace mlp
