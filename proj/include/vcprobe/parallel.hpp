#pragma once

#include <cstddef>

namespace vcprobe {

// Selects between the OpenMP kernel and its serial reference. Both produce
// bit-identical results; the serial path exists for testing and benchmarking.
enum class Exec { Serial, Parallel };

struct ExecConfig {
    Exec policy = Exec::Parallel;
    int workers = 0;  // 0: OpenMP default
};

// Number of threads an OpenMP region would use under `cfg`.
int resolve_workers(const ExecConfig& cfg) noexcept;

}  // namespace vcprobe
