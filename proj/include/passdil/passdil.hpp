#ifndef PASSDIL_PASSDIL_HPP
#define PASSDIL_PASSDIL_HPP

#include "passdil/numerics.hpp"
#include "passdil/symplectic.hpp"
#include "passdil/gaussian.hpp"
#include "passdil/dilation.hpp"
#include "passdil/normal_form.hpp"
#include "passdil/io.hpp"

#endif  // PASSDIL_PASSDIL_HPP
