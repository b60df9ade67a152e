#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ssrisk::cfb {

// True when the buffer begins with the compound-file signature
// D0 CF 11 E0 A1 B1 1A E1.
bool has_cfb_signature(std::span<const std::uint8_t> bytes);

// Lists the stream names in a compound-file container (directory entries of
// object type stream, storages excluded). Answers nullopt when the container
// is structurally unreadable; kind sniffing then falls back to `other`.
std::optional<std::vector<std::string>> list_stream_names(std::span<const std::uint8_t> bytes);

}  // namespace ssrisk::cfb
