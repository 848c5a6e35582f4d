#pragma once

#include <string>

namespace scenforge {

/// Up to six significant digits, no trailing zeros, no "-0". This is the
/// formatting used in Scenic text and trace files.
std::string format_sig6(double value);

/// Parses back what format_sig6 printed. Rounding a value through this pair
/// is how in-memory traces are made identical to their file form.
double quantize_sig6(double value);

/// Shortest representation that round-trips to the same double.
std::string format_shortest(double value);

}  // namespace scenforge
