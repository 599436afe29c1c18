#pragma once

#include <cmath>
#include <cstdint>

namespace skipfree {

// PCG64 (XSL-RR 128/64) with one independent stream per path, so estimates
// are a pure function of (seed, path index) no matter how work is sharded.
class Pcg64 {
 public:
  Pcg64(std::uint64_t seed, std::uint64_t stream) {
    const u128 s = (u128(split(seed ^ 0x853c49e6748fea9bULL)) << 64) | split(seed + stream);
    inc_ = ((u128(split(stream + 0xda3e39cb94b95bdbULL)) << 64) | split(stream ^ seed)) | 1;
    state_ = 0;
    next();
    state_ += s;
    next();
  }

  std::uint64_t next() {
    state_ = state_ * MULT + inc_;
    const std::uint64_t xored = static_cast<std::uint64_t>(state_ >> 64) ^
                                static_cast<std::uint64_t>(state_);
    const unsigned rot = static_cast<unsigned>(state_ >> 122);
    return (xored >> rot) | (xored << ((64 - rot) & 63));
  }

  // uniform on [0, 1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform on (0, 1]
  double uniform_pos() { return 1.0 - uniform(); }

  double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

 private:
  using u128 = unsigned __int128;
  static constexpr u128 MULT = (u128(2549297995355413924ULL) << 64) | 4865540595714422341ULL;

  static std::uint64_t split(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  u128 state_;
  u128 inc_;
};

}  // namespace skipfree
