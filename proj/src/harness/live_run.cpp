#include <stdexcept>

#include "e5sh/harness/experiment.hpp"

namespace e5sh::harness {

RunResult run_experiment_live(const ExperimentConfig& cfg, const std::string&) {
    cfg.validate();
    throw std::runtime_error("live mode: not implemented");
}

}  // namespace e5sh::harness
