#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rider/ingest/normalize.hpp"

namespace rider::ingest {

/// One `timestamp,source_address,value,unit` line. Lines with a different
/// field count still yield a record (missing fields empty, extras folded into
/// the unit) so that nothing is dropped before classification.
RawRecord parse_raw_line(std::string_view line);
std::string format_raw_line(const RawRecord& r);

/// Reads every non-blank line; a leading `timestamp,` header line is skipped.
std::vector<RawRecord> read_raw_csv(std::istream& in);
void write_raw_csv(std::ostream& out, const std::vector<RawRecord>& records, bool header = true);

nlohmann::json to_json(const ExceptionRecord& e);
ExceptionRecord exception_from_json(const nlohmann::json& j);

/// One JSON object per line.
void write_quarantine(std::ostream& out, const std::vector<ExceptionRecord>& records);
std::vector<ExceptionRecord> read_quarantine(std::istream& in);

}  // namespace rider::ingest
