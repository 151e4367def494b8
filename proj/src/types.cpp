#include "xcast/types.hpp"

namespace xcast {

std::string to_string(const SegmentRef& ref) {
  return "f" + std::to_string(ref.file_id) + "^" + std::to_string(ref.segment_index);
}

}  // namespace xcast
