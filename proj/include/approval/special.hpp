#ifndef APPROVAL_SPECIAL_HPP
#define APPROVAL_SPECIAL_HPP

namespace approval
{

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);
/// Two-sided tail P(|T| >= |t|) for Student t with `df` degrees of freedom.
double student_t_two_sided(double t, double df);

} // namespace approval

#endif // APPROVAL_SPECIAL_HPP
