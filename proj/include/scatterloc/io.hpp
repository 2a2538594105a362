#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "scatterloc/errors.hpp"
#include "scatterloc/fock_lattice.hpp"

namespace scatterloc {

/// 17 significant digits, enough to round-trip any double.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Compact label of a basis state: "201" when every occupation is a single digit, "12-0-3" otherwise.
inline std::string state_label(const FockState& s) {
  bool digits = true;
  for (int n : s) digits = digits && n < 10;
  std::string out;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (!digits && j) out += '-';
    out += std::to_string(s[j]);
  }
  return out;
}

/// CSV text accumulated in memory and written in one go.
class CsvBuilder {
 public:
  explicit CsvBuilder(const std::vector<std::string>& header) { row(header); }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) text_ += ',';
      text_ += fields[i];
    }
    text_ += '\n';
  }

  const std::string& str() const noexcept { return text_; }

 private:
  std::string text_;
};

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Writes `content` to `path` through a temporary file and rename, so `path`
/// is either absent/old or complete. `before_rename` is a test hook.
inline void write_atomic(const std::filesystem::path& path, std::string_view content,
                         const std::function<void()>& before_rename = {}) {
  namespace fs = std::filesystem;
  const fs::path tmp = path.string() + ".tmp";
  struct TmpGuard {
    const fs::path& p;
    bool armed = true;
    ~TmpGuard() {
      if (armed) {
        std::error_code ec;
        fs::remove(p, ec);
      }
    }
  } guard{tmp};

  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  if (before_rename) before_rename();
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  guard.armed = false;
}

}  // namespace scatterloc
