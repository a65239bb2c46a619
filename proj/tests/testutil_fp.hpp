#pragma once

#include "bnlkit/oracle.hpp"

namespace testutil {

using bnlkit::FloatSystem;
using bnlkit::FloatValue;
using Rat = bnlkit::oracle::ExactRational;

inline FloatValue rational_round(const Rat& v, const FloatSystem& s) {
  return bnlkit::oracle::round_to_system(v, s);
}

}  // namespace testutil
