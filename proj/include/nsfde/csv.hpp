#pragma once

#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>
#include <string>

namespace nsfde::csv {

/// Line-oriented CSV writer. Doubles are written with %.17g so replays are
/// byte-identical; the generated-at comment is optional for the same reason.
class Writer {
 public:
  Writer(const std::string& path, const std::string& header, bool timestamp)
      : out_(path) {
    if (!out_) throw std::runtime_error("csv: cannot open '" + path + "' for writing");
    if (timestamp) {
      std::time_t now = std::time(nullptr);
      char buf[64];
      std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
      out_ << "# generated " << buf << "\n";
    }
    out_ << header << "\n";
  }

  void field(long long v) {
    sep();
    out_ << v;
  }

  void field(int v) { field(static_cast<long long>(v)); }

  void field(double v) {
    sep();
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out_ << buf;
  }

  void field(const std::string& v) {
    sep();
    out_ << v;
  }

  void endrow() {
    out_ << "\n";
    first_ = true;
  }

 private:
  void sep() {
    if (!first_) out_ << ",";
    first_ = false;
  }

  std::ofstream out_;
  bool first_ = true;
};

}  // namespace nsfde::csv
