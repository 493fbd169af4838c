#include "pwtrack/bspline.hpp"

namespace pwtrack::bspline {

std::ptrdiff_t mirror(std::ptrdiff_t k, std::ptrdiff_t n) {
    if (n == 1) return 0;
    const std::ptrdiff_t period = 2 * (n - 1);
    k %= period;
    if (k < 0) k += period;
    return k < n ? k : period - k;
}

}  // namespace pwtrack::bspline
