#include "phia/error.hpp"

namespace phia {

Error::Error(std::string code, const std::string& detail)
    : std::runtime_error(code + ": " + detail),
      code_(std::move(code)),
      detail_(detail) {}

}  // namespace phia
