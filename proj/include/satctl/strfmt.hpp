#pragma once

#include <cstdarg>
#include <cstdio>
#include <string>

namespace satctl {

// printf-style formatting into a std::string (the toolchain baseline lacks
// std::format). Output longer than the stack buffer is truncated; every
// caller formats short diagnostic strings.
inline std::string strfmt(const char* fmt, ...)
    __attribute__((format(printf, 1, 2)));

inline std::string strfmt(const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  return std::string(buf);
}

}  // namespace satctl
