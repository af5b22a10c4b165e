#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "awblstm/corpus.hpp"

namespace awblstm {

/// One instance as a single JSON line with fields {sentence_id, tokens[],
/// pos_tags[], dist_e1[], dist_e2[], e1_span, e2_span, label}.
std::string instance_to_json_line(const PairInstance& instance);
PairInstance instance_from_json_line(const std::string& line, std::size_t line_no = 0,
                                     const std::string& source = "<string>");

void write_instances(const std::vector<PairInstance>& instances, const std::string& path);
std::vector<PairInstance> read_instances(const std::string& path);

}  // namespace awblstm
