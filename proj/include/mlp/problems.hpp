#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mlp/model.hpp"

namespace mlp {

// The four built-in benchmark PDEs. All use T = 1.
//   allen_cahn    k=1  f = y - y^3        g = 1/(2 + 2|x|^2/5)   flow sqrt(2)*BM
//   sine_gordon   k=1  f = sin(y)         same g and flow
//   heat_system   k=2  f = (y2/(1+y2^2), 2 y1/3)
//                      g = (1/(2 + 2|x|^2/5), log((1+|x|^2)/2))  flow sqrt(2)*BM
//   semilinear_bs k=1  f = y/(1+y^2)      g = log((1+|x|^2)/2)   unit-drift GBM
enum class BuiltinExample { allen_cahn, sine_gordon, heat_system, semilinear_bs };

// Accepts the CLI spellings ("allen-cahn", ...); underscores also work.
BuiltinExample parse_example_name(std::string_view name);
std::string_view example_name(BuiltinExample ex);

SemilinearProblem builtin_problem(BuiltinExample ex, int d);

// The benchmark query for an example: t = 0, the standard evaluation point
// (the origin, or (50,...,50) for the Black-Scholes problem) and the default
// truncation radius (4 for Allen-Cahn, infinite otherwise). n and M are left
// for the caller.
MlpQuery default_query(BuiltinExample ex, int d);

enum class Provenance { paper_ds, paper_mlp, self_computed };
std::string_view provenance_name(Provenance p);
Provenance parse_provenance(std::string_view name);

struct ReferenceSolution {
    std::vector<double> value;
    Provenance provenance = Provenance::self_computed;
    BuiltinExample example = BuiltinExample::allen_cahn;
    int d = 0;
};

// Published reference solutions, loaded from the plain-text fixture file
// (one record per line: example, d, provenance, k, k value components).
class ReferenceTable {
public:
    static ReferenceTable load(const std::string& path);

    bool has(BuiltinExample ex, int d, Provenance p) const;
    // Throws std::runtime_error when the fixture is missing.
    ReferenceSolution lookup(BuiltinExample ex, int d, Provenance p) const;

    std::size_t size() const { return entries_.size(); }

private:
    std::vector<ReferenceSolution> entries_;
};

} // namespace mlp
