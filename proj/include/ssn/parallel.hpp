#pragma once

namespace ssn {

/// Thread count for a kernel: `requested` if positive, else the
/// SSN_THREADS environment variable, else the OpenMP default.
int resolve_threads(int requested);

} // namespace ssn
