#pragma once

#include <string>
#include <string_view>

namespace tpf::eval {

/// Lowercase, punctuation to spaces, whitespace collapsed, one trailing "s" dropped from
/// every word longer than three letters (but not from "ss" endings).
std::string normalize_term(std::string_view term);

/// Normalized forms equal, or one side is a single word equal to the initials of the
/// other side's (two or more) words. False when either side normalizes to empty.
bool smart_match(std::string_view restored, std::string_view gold);

}  // namespace tpf::eval
