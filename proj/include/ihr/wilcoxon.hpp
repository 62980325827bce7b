#pragma once

#include <span>

namespace ihr {

// Two-sided Wilcoxon signed-rank test on paired per-example losses.
// Zero differences are dropped, tied |differences| get mid-ranks; when all
// differences are zero the p-value is 1 by convention.
// Dispatches to exact enumeration when <= 12 nonzero differences remain,
// otherwise to the normal approximation.
double wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

// The two routes, exposed separately so they can be checked against each other.
double wilcoxon_exact_p(std::span<const double> a, std::span<const double> b);
double wilcoxon_normal_p(std::span<const double> a, std::span<const double> b);

} // namespace ihr
