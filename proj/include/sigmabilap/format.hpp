#pragma once

#include <string>

namespace sigmabilap {

// 17 significant digits, round-trip safe.
std::string fmt17(double x);

}  // namespace sigmabilap
