#pragma once

namespace blockcov::cli {

/// Entry point of the `blockcov` tool. Returns 0 on success, 1 on flag,
/// parse or I/O errors, 2 on numerical failure.
int run(int argc, const char* const* argv);

}  // namespace blockcov::cli
