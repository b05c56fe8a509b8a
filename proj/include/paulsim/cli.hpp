#pragma once

namespace paulsim::cli {

/// Entry point shared by the binary and the tests. Exit codes: 0 success,
/// 1 domain error (instability, singularity, integration failure),
/// 2 usage error.
int run(int argc, const char* const* argv);

} // namespace paulsim::cli
