#include "vcprobe/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vcprobe {

int resolve_workers(const ExecConfig& cfg) noexcept {
    if (cfg.policy == Exec::Serial) return 1;
    if (cfg.workers > 0) return cfg.workers;
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace vcprobe
