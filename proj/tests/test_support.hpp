#pragma once

#include "rac/bits.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ractest {

inline std::string corpusPath(const std::string& name) {
  return std::string(RAC_CORPUS_DIR) + "/" + name;
}

inline std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Uniform draw over [0, 2^width). Hand-rolled from 64-bit blocks so the
// stream is identical on every platform.
inline rac::Int drawRaw(std::mt19937_64& rng, int width) {
  rac::Int x = 0;
  int filled = 0;
  while (filled < width) {
    x <<= 64;
    x |= rac::Int(rng());
    filled += 64;
  }
  return x & ((rac::Int(1) << width) - 1);
}

} // namespace ractest
