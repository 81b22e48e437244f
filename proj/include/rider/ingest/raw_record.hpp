#pragma once

#include <string>

namespace rider::ingest {

/// A record as received from a supervisor. Nothing about it is trusted.
struct RawRecord {
  std::string source_address;
  std::string timestamp_text;
  std::string value_text;
  std::string unit_text;

  friend bool operator==(const RawRecord&, const RawRecord&) = default;
};

}  // namespace rider::ingest
