#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fv {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;

// all user-facing failures (bad files, bad geometry, bad requests) are
// reported through this; engines throw, the CLI maps it to exit code 2
struct error : std::runtime_error {
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// printf-style helper; deterministic (no locale)
std::string strf(const char* fmt, ...);

// fixed-precision decimal for reports; trailing zeros kept so output is
// byte-stable across runs
std::string fmt_fixed(double v, int digits);

// write via temp file + rename so readers never observe partial output
void atomic_write(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

// integer floor(sqrt(v)) for exact distance flooring
i64 isqrt_floor(i128 v);

}  // namespace fv
