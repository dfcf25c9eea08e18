#pragma once

#include <string>
#include <string_view>

namespace ihgnn {

// Shortest decimal text that parses back to the identical double.
std::string format_double(double value);

// Strict parse of a full token; throws ValidationError on trailing junk.
double parse_double(std::string_view token);
long long parse_int(std::string_view token);

} // namespace ihgnn
