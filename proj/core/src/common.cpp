#include "havoc/common.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace havoc {

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
    // One SplitMix64 scramble over (master ^ rotated index); consecutive
    // indices yield uncorrelated streams.
    SeededStream s(master_seed ^ (0x632be59bd9b4e019ULL * (index + 1)));
    return s.next_u64();
}

std::string Fnv1a64::hex() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(hash_));
    return std::string(buf);
}

std::string fnv1a_hex(std::string_view bytes) {
    Fnv1a64 d;
    d.update(bytes);
    return d.hex();
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            return out;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double_strict(std::string_view token, const std::string& context) {
    if (token.empty()) {
        throw DecodeError(context + ": empty numeric value");
    }
    double value = 0.0;
    auto res = std::from_chars(token.data(), token.data() + token.size(), value);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
        throw DecodeError(context + ": bad numeric value '" + std::string(token) + "'");
    }
    return value;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open file '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write file '" + path + "'");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw IoError("short write to '" + path + "'");
    }
}

}  // namespace havoc
