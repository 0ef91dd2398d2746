#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mlp/estimator.hpp"
#include "mlp/problems.hpp"

namespace mlp {

// Reference against which relative errors are computed: a published fixture
// (ds or mlp provenance) or a self-computed high-order MLP average.
struct PaperReference {
    Provenance which = Provenance::paper_mlp;
};
struct SelfReference {
    int n_ref = 8;
    int runs_ref = 5;
};
using ReferenceMode = std::variant<PaperReference, SelfReference>;

// One benchmark campaign: every (d, n) cell of one example, M = n, a fixed
// number of independent realizations per cell (run j uses root key j).
struct ExperimentSpec {
    BuiltinExample example = BuiltinExample::allen_cahn;
    std::vector<int> dims{10};
    std::vector<int> iterations{1, 2, 3, 4, 5};
    int runs_per_cell = 5;
    ReferenceMode reference = PaperReference{};
    std::uint64_t master_seed = 1;
    int workers = 1;
    // Optional overrides of the example's default query / flow.
    std::optional<double> t_override;
    std::optional<TruncationRadius> r_override;
    std::optional<int> em_steps_override; // replace the exact flow by its EM discretization
    // When false the runtime column is written as 0 so that outputs are a
    // pure function of (spec, seed).
    bool measure_timing = true;
};

// One table row: the first realization of the cell, the reference, the
// relative L2 error over all realizations, and the cost/time of the first
// realization.
struct ResultRow {
    int d = 0;
    int n = 0;
    std::vector<double> value;
    std::vector<double> reference;
    Provenance provenance = Provenance::self_computed;
    double rel_l2_error = 0.0;
    std::uint64_t gaussian_scalars = 0;
    std::uint64_t uniforms = 0;
    double runtime_seconds = 0.0;
};

// All realizations of one cell, in run order (exposed for diagnostics and
// for recomputing the error column).
struct CellRealizations {
    int d = 0;
    int n = 0;
    std::vector<std::vector<double>> values;
};

// sqrt(mean_j |v_j - ref|^2) / |ref| with Euclidean norms; for k = 1 this is
// the usual scalar relative L2 error.
double relative_l2_error(const std::vector<std::vector<double>>& samples,
                         std::span<const double> ref);

// Mean of runs_ref independent realizations at (n_ref, M = n_ref) for the
// spec's example at dimension d, computed with the spec's overrides and
// seed. Reference runs use the root keys -(1+j), disjoint from experiment
// runs. Requires n_ref >= max(spec.iterations).
ReferenceSolution self_reference(const ExperimentSpec& spec, int d);

// Runs the whole campaign. `refs` is required for fixture reference modes
// (may be null otherwise). Rows come back sorted by (d, n); the content is a
// pure function of (spec, seed) — worker count only changes scheduling.
// When `realizations` is non-null it receives every cell's run values.
std::vector<ResultRow> run_experiment(const ExperimentSpec& spec, const ReferenceTable* refs,
                                      std::vector<CellRealizations>* realizations = nullptr);

// CSV with header d,n,value..,reference..,provenance,rel_l2_error,
// gaussian_scalars,uniforms,runtime_seconds; doubles at full precision
// (17 significant digits). When `workers_note` is set a "# workers=N"
// comment precedes the header.
void emit_csv(const std::vector<ResultRow>& rows, const std::string& path,
              std::optional<int> workers_note = std::nullopt);
std::vector<ResultRow> read_csv(const std::string& path);

// Plain-text (gaussian_scalars, rel_l2_error) series per dimension next to
// `path` plus a self-contained log-log SVG chart at `path`, one series per d.
void emit_plot(const std::vector<ResultRow>& rows, const std::string& path);

// Fixed-width text table in the style of the benchmark tables (values
// rounded to 5 decimals, k = 2 values rendered as "(v1, v2)").
std::string render_table(const std::vector<ResultRow>& rows);

// Soft sanity check: for each d, wall time should grow with n in the
// dominant-cost regime (n >= 4). Returns human-readable warnings, empty when
// nothing is suspicious or timing was not measured.
std::vector<std::string> timing_monotonicity_warnings(const std::vector<ResultRow>& rows);

} // namespace mlp
