#pragma once

#include "socgcf/config.hpp"

namespace socgcf {

// Command implementations; each returns a process exit code and throws on
// misconfiguration or I/O failure.
int cmd_preprocess(const RunConfig& cfg);
int cmd_train(const RunConfig& cfg);
int cmd_evaluate(const RunConfig& cfg);
int cmd_ablate(const RunConfig& cfg);
int cmd_check(const RunConfig& cfg);

// `socgcf <command> [--config file] [--key value ...]`; catches exceptions
// and maps them to exit status 1.
int run_cli(int argc, char** argv);

}  // namespace socgcf
