#include "opo/digest.hpp"

#include <openssl/sha.h>

#include <array>

namespace opo {

static std::array<unsigned char, SHA256_DIGEST_LENGTH> sha256_raw(std::string_view data) {
    std::array<unsigned char, SHA256_DIGEST_LENGTH> md{};
    SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), md.data());
    return md;
}

std::string sha256_hex(std::string_view data) {
    static const char* hex = "0123456789abcdef";
    auto md = sha256_raw(data);
    std::string out;
    out.reserve(2 * md.size());
    for (unsigned char b : md) {
        out.push_back(hex[b >> 4]);
        out.push_back(hex[b & 0xF]);
    }
    return out;
}

std::uint64_t digest_seed(std::string_view data) {
    auto md = sha256_raw(data);
    std::uint64_t seed = 0;
    for (int i = 0; i < 8; ++i) seed = (seed << 8) | md[static_cast<std::size_t>(i)];
    return seed;
}

}  // namespace opo
