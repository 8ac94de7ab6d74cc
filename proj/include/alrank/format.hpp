#ifndef ALRANK_FORMAT_HPP_
#define ALRANK_FORMAT_HPP_

#include <charconv>
#include <string>

namespace alrank {

// Shortest decimal text that reads back to the same double.
inline std::string FormatDouble(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace alrank

#endif  // ALRANK_FORMAT_HPP_
