#pragma once

#include <string>
#include <vector>

namespace relaynet {

// 12 significant digits, '.' decimal separator, locale-independent.
std::string format_sig12(double v);

// RFC-4180: quote fields containing separators or quotes.
std::string csv_field(const std::string& field);

std::string join_ints(const std::vector<int>& v, const std::string& sep = " ");

}  // namespace relaynet
