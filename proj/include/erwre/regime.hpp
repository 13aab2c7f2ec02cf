#ifndef ERWRE_REGIME_HPP
#define ERWRE_REGIME_HPP

#include <string>

namespace erwre {

enum class RegimeLabel { LeftTransient, Recurrent, RightTransient, Indeterminate };

inline const char* to_string(RegimeLabel label) noexcept
{
    switch (label) {
    case RegimeLabel::LeftTransient:
        return "LeftTransient";
    case RegimeLabel::Recurrent:
        return "Recurrent";
    case RegimeLabel::RightTransient:
        return "RightTransient";
    case RegimeLabel::Indeterminate:
        return "Indeterminate";
    }
    return "?";
}

} // namespace erwre

#endif // ERWRE_REGIME_HPP
