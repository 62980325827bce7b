#pragma once

#include <vector>

namespace ihr {

struct Example {
    std::vector<double> x;
    int label = 0;
};

} // namespace ihr
