#include "calmdesk/errors.hpp"

#include <utility>

namespace calmdesk {

Error::Error(std::string code, const std::string& message)
    : std::runtime_error(message), code_(std::move(code)) {}

} // namespace calmdesk
