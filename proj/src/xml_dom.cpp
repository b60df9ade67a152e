#include "ssrisk/xml_dom.hpp"

#include <expat.h>

#include <cstring>

namespace ssrisk::xml {

const std::string* Node::attr(std::string_view key) const {
    for (const auto& [k, v] : attrs) {
        if (k == key) return &v;
    }
    return nullptr;
}

const Node* Node::child(std::string_view name) const {
    for (const auto& c : children) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

std::vector<const Node*> Node::children_named(std::string_view name) const {
    std::vector<const Node*> out;
    for (const auto& c : children) {
        if (c.name == name) out.push_back(&c);
    }
    return out;
}

namespace {

std::string strip_prefix(const char* qname) {
    const char* colon = std::strrchr(qname, ':');
    return colon ? std::string(colon + 1) : std::string(qname);
}

struct BuildState {
    Node root;
    std::vector<Node*> stack;
    bool rejected = false;

    static void XMLCALL on_start(void* ud, const XML_Char* name, const XML_Char** atts) {
        auto* st = static_cast<BuildState*>(ud);
        Node* parent = st->stack.empty() ? nullptr : st->stack.back();
        Node* node;
        if (!parent) {
            node = &st->root;
        } else {
            parent->children.emplace_back();
            node = &parent->children.back();
        }
        node->name = strip_prefix(name);
        for (int i = 0; atts[i]; i += 2) {
            node->attrs.emplace_back(strip_prefix(atts[i]), atts[i + 1]);
        }
        st->stack.push_back(node);
    }

    static void XMLCALL on_end(void* ud, const XML_Char*) {
        auto* st = static_cast<BuildState*>(ud);
        if (!st->stack.empty()) st->stack.pop_back();
    }

    static void XMLCALL on_text(void* ud, const XML_Char* s, int len) {
        auto* st = static_cast<BuildState*>(ud);
        if (!st->stack.empty()) st->stack.back()->text.append(s, static_cast<size_t>(len));
    }

    static void XMLCALL on_entity_decl(void* ud, const XML_Char*, int, const XML_Char*, int,
                                       const XML_Char*, const XML_Char*, const XML_Char*,
                                       const XML_Char*) {
        static_cast<BuildState*>(ud)->rejected = true;
    }
};

}  // namespace

Node parse(std::span<const std::uint8_t> bytes) {
    XML_Parser p = XML_ParserCreate(nullptr);
    if (!p) throw XmlError("parser allocation failed");
    BuildState st;
    XML_SetUserData(p, &st);
    XML_SetElementHandler(p, BuildState::on_start, BuildState::on_end);
    XML_SetCharacterDataHandler(p, BuildState::on_text);
    XML_SetEntityDeclHandler(p, BuildState::on_entity_decl);

    // Feed in bounded chunks so int lengths stay safe for large parts.
    constexpr size_t kChunk = 1u << 28;
    XML_Status status = XML_STATUS_OK;
    size_t off = 0;
    do {
        size_t n = std::min(kChunk, bytes.size() - off);
        status = XML_Parse(p, reinterpret_cast<const char*>(bytes.data()) + off,
                           static_cast<int>(n), off + n == bytes.size());
        off += n;
        if (st.rejected) break;
    } while (status == XML_STATUS_OK && off < bytes.size());

    std::string err;
    if (st.rejected) {
        err = "entity declarations rejected";
    } else if (status != XML_STATUS_OK) {
        err = XML_ErrorString(XML_GetErrorCode(p));
        err += " at line " + std::to_string(XML_GetCurrentLineNumber(p));
    }
    XML_ParserFree(p);
    if (!err.empty()) throw XmlError(err);
    if (st.root.name.empty()) throw XmlError("empty document");
    return std::move(st.root);
}

}  // namespace ssrisk::xml
