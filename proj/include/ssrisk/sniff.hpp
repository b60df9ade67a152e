#pragma once

#include <cstdint>
#include <span>

#include "ssrisk/file_record.hpp"

namespace ssrisk {

// Classifies a file purely from its bytes; extensions play no part.
//   - ZIP with a workbook main part in [Content_Types].xml -> ooxml kind
//     (macro variant on macro-enabled content type or a VBA project part)
//   - any other valid ZIP -> zip-archive
//   - OLE compound file with a Workbook/Book stream -> legacy binary
//   - OLE compound file wrapping an encrypted OOXML payload -> encrypted
//   - everything else (including unreadable containers) -> other
FileKind sniff_kind(std::span<const std::uint8_t> bytes);

}  // namespace ssrisk
