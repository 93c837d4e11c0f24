#ifndef IDIOMSPACE_DIGEST_HPP
#define IDIOMSPACE_DIGEST_HPP

#include <filesystem>
#include <string>
#include <string_view>

namespace idiomspace {

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

}  // namespace idiomspace

#endif  // IDIOMSPACE_DIGEST_HPP
