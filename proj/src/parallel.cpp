#include "ssn/parallel.hpp"

#include <cstdlib>

#include <omp.h>

namespace ssn {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SSN_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return omp_get_max_threads();
}

} // namespace ssn
