#pragma once

#include "cpfit/kruskal.hpp"

#include <vector>

namespace cpfit {

enum class StopReason {
    GradTol,  // ||g||_2 / scale fell below the tolerance
    MaxIters, // iteration budget exhausted
    Stalled,  // two consecutive line-search stalls
};

const char* to_string(StopReason reason);

/// One row per accepted iterate; row 0 is the initial point.
struct TraceRecord {
    int iter = 0;
    double time_s = 0.0; // cumulative wall-clock seconds (monotonic)
    double f = 0.0;
    double h = 0.0;
    double gnorm_rel = 0.0; // ||g||_2 / ||T||_F
    long fevals = 0;        // cumulative objective evaluations
    long gevals = 0;        // cumulative gradient evaluations
    int precond_calls = 0;  // cumulative one-step (ALS) applications
    bool restart = false;
    double beta = 0.0; // accepted line-search step
};

struct Trace {
    std::vector<TraceRecord> records;

    void zero_times() {
        for (auto& r : records) r.time_s = 0.0;
    }
};

struct SolveResult {
    KruskalTensor solution;
    Trace trace;
    StopReason stop_reason;
};

} // namespace cpfit
