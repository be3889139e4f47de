#pragma once

namespace pose {

// Applies the POSE_THREADS cap to the OpenMP runtime; no-op when unset.
void init_threads_from_env();

int worker_count();

} // namespace pose
