#include "uvol/surface.hpp"

#include <iomanip>
#include <ostream>

namespace uvol {

void Surface::write_csv(std::ostream& os) const {
    os << "t,x,u,delta,gamma,control\n";
    os << std::setprecision(17);
    for (int i = 0; i <= grid_.n_time; ++i) {
        for (int j = 0; j < grid_.n_space; ++j) {
            os << t_node(i) << ',' << x_node(j) << ',' << value(i, j) << ','
               << delta(i, j) << ',' << gamma(i, j) << ',' << control(i, j)
               << '\n';
        }
    }
}

} // namespace uvol
