#include "robustbid/hashing.hpp"

#include <fstream>
#include <vector>

#include "robustbid/errors.hpp"

namespace robustbid {

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path + " for checksum");
  std::uint64_t state = kFnvOffset;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    state = fnv1a64(buf.data(), static_cast<std::size_t>(in.gcount()), state);
  }
  return state;
}

std::string to_hex(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

}  // namespace robustbid
