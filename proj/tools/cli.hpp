#pragma once

#include <iosfwd>

namespace wcga {

/// Entry point of the `wcga` tool. Returns 0 on success, 1 for bad input
/// (arguments, configs, report files) and 2 for numerical failures or
/// failed verifications.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wcga
