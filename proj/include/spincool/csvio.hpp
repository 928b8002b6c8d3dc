#pragma once

#include <string>

namespace spincool::csv {

// Fixed 12-significant-digit scientific formatting.  All data files go
// through this one formatter so repeated runs are byte-identical.
std::string num(double x);

}  // namespace spincool::csv
