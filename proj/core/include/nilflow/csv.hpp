#pragma once

#include <cstdio>
#include <initializer_list>
#include <ostream>
#include <string>

namespace nilflow {

// Round-trip formatting: 17 significant digits.
inline std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(std::ostream& os, std::initializer_list<const char*> header) : os_(os) {
    bool first = true;
    for (const char* h : header) {
      os_ << (first ? "" : ",") << h;
      first = false;
    }
    os_ << '\n';
  }

  template <class... Ts>
  void row(const Ts&... xs) {
    bool first = true;
    ((os_ << (first ? "" : ",") << cell(xs), first = false), ...);
    os_ << '\n';
  }

 private:
  static std::string cell(double x) { return fmt17(x); }
  static std::string cell(long long x) { return std::to_string(x); }
  static std::string cell(long x) { return std::to_string(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(unsigned long x) { return std::to_string(x); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }

  std::ostream& os_;
};

}  // namespace nilflow
