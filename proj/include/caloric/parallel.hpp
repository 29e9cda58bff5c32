#pragma once

#include <functional>
#include <vector>

namespace caloric {

// Worker count for stencil row bands (default 1). Results never depend on it:
// every kernel writes disjoint rows and reductions sum per-row partials in row order.
void set_jobs(int jobs);
int jobs();

// Calls fn(row_begin, row_end) over [0, rows) split into contiguous bands.
void for_rows(int rows, const std::function<void(int, int)>& fn);

// Sums row_value(r) for r in [0, rows) in fixed row order.
double sum_rows(int rows, const std::function<double(int)>& row_value);

}  // namespace caloric
