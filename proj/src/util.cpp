#include "kgr/util.hpp"

#include <openssl/evp.h>

#include <array>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "kgr/errors.hpp"

namespace kgr::util {

namespace fs = std::filesystem;

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr ||
        EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx, digest.data(), &len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw DataError("sha256 digest failed");
    }
    EVP_MD_CTX_free(ctx);

    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string sha256_hex16(std::string_view data) {
    return sha256_hex(data).substr(0, 16);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open file: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
        throw DataError("read failed: " + path.string());
    }
    return buf.str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
    fs::path dir = path.parent_path();
    if (!dir.empty()) {
        fs::create_directories(dir);
    }
    static std::atomic<std::uint64_t> sequence{0};
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(sequence.fetch_add(1) + 1);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw DataError("cannot open file for writing: " + tmp.string());
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            throw DataError("write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw DataError("rename failed for " + path.string() + ": " + ec.message());
    }
}

bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

std::string_view trim(std::string_view s) {
    size_t b = 0;
    size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_whitespace(std::string_view s) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        size_t b = i;
        while (i < s.size() && !is_space(s[i])) ++i;
        if (i > b) {
            out.emplace_back(s.substr(b, i - b));
        }
    }
    return out;
}

std::vector<std::string> split_lines(std::string_view s) {
    std::vector<std::string> out;
    size_t b = 0;
    while (b <= s.size()) {
        size_t e = s.find('\n', b);
        if (e == std::string_view::npos) {
            if (b < s.size()) {
                out.emplace_back(s.substr(b));
            }
            break;
        }
        std::string_view line = s.substr(b, e - b);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        out.emplace_back(line);
        b = e + 1;
    }
    return out;
}

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    bool pending = false;
    for (char c : trim(s)) {
        if (is_space(c)) {
            pending = true;
            continue;
        }
        if (pending && !out.empty()) {
            out.push_back(' ');
        }
        pending = false;
        out.push_back(c);
    }
    return out;
}

bool starts_with_upper(std::string_view s) {
    return !s.empty() && std::isupper(static_cast<unsigned char>(s.front())) != 0;
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
    if (bound == 0) {
        throw DataError("uniform_below: bound must be positive");
    }
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % bound;
    std::uint64_t v = rng();
    while (v >= limit) {
        v = rng();
    }
    return v % bound;
}

std::string format_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

} // namespace kgr::util
