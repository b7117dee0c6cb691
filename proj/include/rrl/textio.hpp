#pragma once

#include <string>

namespace rrl::textio {

// Shortest text that still round-trips the double exactly (%.17g).
std::string format_g17(double value);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace rrl::textio
