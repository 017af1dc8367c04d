#pragma once

namespace nvmag {

// Selects between the OpenMP kernel and the serial reference it is tested against.
enum class Exec { Serial, Parallel };

}  // namespace nvmag
