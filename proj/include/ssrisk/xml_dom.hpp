#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ssrisk::xml {

class XmlError : public std::runtime_error {
public:
    explicit XmlError(const std::string& what) : std::runtime_error(what) {}
};

// Small DOM for OOXML parts. Element and attribute names are stored with
// namespace prefixes stripped ("x:sheet" -> "sheet", "r:id" -> "id"); the
// parts this project reads use fixed namespaces, so local names identify
// everything unambiguously.
struct Node {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attrs;
    std::vector<Node> children;
    std::string text;  // direct character data, concatenated

    const std::string* attr(std::string_view key) const;
    const Node* child(std::string_view name) const;
    std::vector<const Node*> children_named(std::string_view name) const;
};

// Parses a whole document; throws XmlError on malformed XML or any DTD /
// entity declaration (OOXML never carries them; rejecting defuses expansion
// attacks).
Node parse(std::span<const std::uint8_t> bytes);

}  // namespace ssrisk::xml
