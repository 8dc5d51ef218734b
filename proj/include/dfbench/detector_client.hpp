#pragma once

#include <span>
#include <string>
#include <vector>

#include "dfbench/service.hpp"

namespace dfbench {

/// One line on the detector's stdin: {"id": ..., "image_path": ...}
struct DetectorRequest {
  std::string id;
  std::string image_path;
};

struct DetectorRun {
  /// One row per request, in request order.
  std::vector<service::SubmissionRow> rows;
  /// Human-readable problems: error responses, malformed lines, missing ids.
  std::vector<std::string> log;
  int exit_status = 0;
};

/// Starts `sh -c command`, streams requests as JSON lines and reads
/// {"id", "score"} or {"id", "error"} lines back. Items without a valid
/// score get `fallback` and a log entry. Throws IoError if the process
/// cannot be started.
DetectorRun run_detector(const std::string& command, std::span<const DetectorRequest> requests,
                         double fallback = 0.5);

}  // namespace dfbench
