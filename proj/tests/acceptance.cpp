#include "banditlab/statfn.hpp"
int main(){return 0;}
