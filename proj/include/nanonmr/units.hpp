#pragma once

#include <string>

namespace nanonmr {

// Quantity parsers for CLI/config values. A plain number is taken in the
// base unit (seconds, hertz, tesla, meters); a suffix converts:
//   time:      ns us ms s min h
//   frequency: Hz kHz MHz GHz
//   field:     T mT uT nT G
//   length:    m mm um nm
// Suffix matching is case-sensitive ("ms" vs "Ms"); whitespace between the
// number and the suffix is allowed.
double parse_time(const std::string& text);       // -> seconds
double parse_frequency(const std::string& text);  // -> hertz
double parse_field(const std::string& text);      // -> tesla
double parse_length(const std::string& text);     // -> meters
double parse_number(const std::string& text);     // unitless

}  // namespace nanonmr
