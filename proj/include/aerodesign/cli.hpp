#pragma once

#include <ostream>

namespace aerodesign {

/// Entry point of the aerodesign command-line tool.
///
///     aerodesign build-kg --corpus DIR --prompt systems_engineer_kg --out kg.csv [--config FILE]
///     aerodesign run --config FILE [--run-id ID]
///     aerodesign status --config FILE --run ID
///     aerodesign decide --config FILE --run ID (--accept | --reject | --proceed) [--comment TEXT]
///     aerodesign optimize --m 0.05 --p 0.4 --t 0.14 [--budget N] [--out DIR]
///     aerodesign serve --config FILE --addr HOST:PORT
///     aerodesign export --config FILE --run ID --out DIR
///
/// Returns 0 on success, 1 on usage errors, 2 on runtime errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace aerodesign
