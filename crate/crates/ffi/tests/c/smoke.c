#include <stdio.h>
#include "prodsat.h"

int main(void) {
    ProdsatInstance *inst = NULL;
    if (prodsat_instance_random(3, 200, 160, 7, 0, &inst) != PRODSAT_STATUS_OK) {
        fprintf(stderr, "%s\n", prodsat_last_error());
        return 1;
    }
    ProdsatSolution *sol = NULL;
    ProdsatStatus s = prodsat_solve(inst, 7, 1e-8, &sol);
    if (s != PRODSAT_STATUS_OK) {
        fprintf(stderr, "solve: %d %s\n", (int)s, prodsat_last_error());
        return 1;
    }
    double res = 1.0;
    prodsat_solution_residual(sol, inst, &res);
    printf("%zu %.3e\n", prodsat_solution_n_qubits(sol), res);
    uint64_t mv = 0;
    prodsat_mixed_volume("x1*x2 + 2*x1 + 3*x2 + 4\n5*x2^2 + 6*x1 + 7", &mv);
    printf("%llu\n", (unsigned long long)mv);
    prodsat_solution_free(sol);
    prodsat_instance_free(inst);
    return res < 1e-8 && mv == 3 ? 0 : 1;
}
