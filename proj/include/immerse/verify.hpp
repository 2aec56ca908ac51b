#pragma once

#include <ostream>
#include <string>

namespace immerse {

// Evaluates a trace against an assertions file:
//
//   expect count kind=<Kind> [<key>=<value> ...] <op> <int>
//   expect order <Kind>[<index>].<key> == <value>
//
// ops: == != <= >= < >. Returns 0 when every assertion holds, 1 on the first
// failure (printed to out), 2 on unreadable or malformed input.
int verify_trace(const std::string& trace_path, const std::string& assertions_path,
                 std::ostream& out);

// 0 iff the two files are byte-identical; 1 with the first differing line
// reported; 2 on IO errors.
int replay_check(const std::string& path_a, const std::string& path_b, std::ostream& out);

}  // namespace immerse
