#pragma once

#include <string_view>

namespace adequacy {

[[nodiscard]] std::string_view version() noexcept;

}  // namespace adequacy
