#pragma once

namespace ace {

// Exit codes: 0 success, 1 configuration or usage error, 2 runtime failure.
int cli_main(int argc, char** argv);

}  // namespace ace
