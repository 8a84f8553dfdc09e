#pragma once

namespace bwvi {

// Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.
int cli_main(int argc, char** argv);

}  // namespace bwvi
