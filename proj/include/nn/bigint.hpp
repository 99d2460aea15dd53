#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace nn {

// Orders like 3^38 - 1 overflow 64 bits; formula evaluation stays exact.
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

}  // namespace nn
