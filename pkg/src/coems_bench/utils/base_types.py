import typing

Kelvin = typing.NewType("Kelvin", float)
Kilogram = typing.NewType("Kilogram", float)
Hertz = typing.NewType("Hertz", float)
RadPerSecond = typing.NewType("RadPerSecond", float)

# Displacement PSD, double-sided in angular frequency (m^2 s)
AngularPsd = typing.NewType("AngularPsd", float)
# Displacement PSD, single-sided in hertz (m^2 / Hz)
HertzPsd = typing.NewType("HertzPsd", float)

Seed = typing.NewType("Seed", int)
IsoTimestamp = typing.NewType("IsoTimestamp", str)

LoopSide = typing.Literal["inloop", "outloop"]
IntegratorName = typing.Literal["exact-gaussian", "semi-implicit-euler"]
WindowName = typing.Literal["hann", "rectangular"]
