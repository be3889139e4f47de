#include "pose/threads.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

namespace pose {

void init_threads_from_env() {
    const char* env = std::getenv("POSE_THREADS");
    if (!env) return;
    try {
        const int n = std::stoi(env);
        if (n >= 1) omp_set_num_threads(std::min(n, omp_get_max_threads()));
    } catch (...) {
        // ignore malformed values, keep the runtime default
    }
}

int worker_count() { return omp_get_max_threads(); }

} // namespace pose
