#include "vallois/vallois.h"
