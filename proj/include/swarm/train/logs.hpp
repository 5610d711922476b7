#pragma once

#include <string>
#include <vector>

#include "swarm/train/trainer.hpp"

namespace swarm::train {

/// Shortest round-trippable decimal form.
std::string format_double(double x);

/// train_log.csv: phase,episode,upper_return,lower_return,win,captured,reached,steps.
/// Rows already in the file for other phases are kept, rows of the phases
/// being written are replaced, and the result is ordered by (phase, episode).
void write_train_log(const std::string& path, const std::vector<TrainLogRow>& rows);
std::vector<TrainLogRow> read_train_log(const std::string& path);

/// h_trace.csv: episode,t,v_hat,h,span,n,mean_weight.
void write_h_trace(const std::string& path, const std::vector<HTraceRow>& rows);
std::vector<HTraceRow> read_h_trace(const std::string& path);

/// timing.csv: phase,episode,seconds. Wall-clock, so never byte-stable.
void write_timing(const std::string& path, const std::vector<TimingRow>& rows);

/// Checkpoint manifest {phase, episode, config_hash, checkpoint}.
void write_manifest(const std::string& path, const std::string& phase, int episode,
                    const std::string& hash, const std::string& checkpoint);

}  // namespace swarm::train
