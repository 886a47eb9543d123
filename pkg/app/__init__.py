# paquete principal: percolación continua con pasos en anillo
