#pragma once

#include <array>
#include <cstddef>
#include <string>

namespace awblstm {

/// Interaction classes. `Other` marks annotated non-interacting pairs.
enum class Label : int { Advice = 0, Effect = 1, Mechanism = 2, Int = 3, Other = 4 };

inline constexpr std::size_t kNumClasses = 5;
inline constexpr std::array<const char*, kNumClasses> kLabelNames{"Advice", "Effect",
                                                                  "Mechanism", "Int", "Other"};

const std::string& label_name(Label l);

/// Parse a label from its canonical name ("Advice", ...). Throws
/// ValidationError on anything else.
Label label_from_name(const std::string& name);

/// Parse the corpus `type` attribute of a positive pair. Accepts the corpus
/// spellings case-insensitively ("advise"/"advice", "effect", "mechanism",
/// "int"). Throws ValidationError listing the offending value.
Label label_from_corpus_type(const std::string& type);

}  // namespace awblstm
