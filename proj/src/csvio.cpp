#include "spincool/csvio.hpp"

#include <cstdio>

namespace spincool::csv {

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.11e", x);
    return buf;
}

}  // namespace spincool::csv
