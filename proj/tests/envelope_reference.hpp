#pragma once

// Generated by tests/tools/gen_envelope_reference.py (60-digit mpmath).
// 100 log-spaced points z in [1e-4, 1e4] for the diffusion envelope.
// Do not edit by hand.

namespace nanonmr::testing {

struct EnvelopeReference { double z; double c; };

inline constexpr EnvelopeReference kEnvelopeReference[] = {
    {0.0001                  , 0.99941128142298823},
    {0.00012045035402587823  , 0.99929221061304982},
    {0.000145082877849594    , 0.99914921547487651},
    {0.0001747528400007683   , 0.99897754042260532},
    {0.00021049041445120198  , 0.99877150136306315},
    {0.00025353644939701115  , 0.99852430993547088},
    {0.0003053855508833416   , 0.9982278663239395},
    {0.0003678379771828634   , 0.99787251565194176},
    {0.0004430621457583882   , 0.99744676239916802},
    {0.0005336699231206312   , 0.99693693673541587},
    {0.0006428073117284319   , 0.99632680618941348},
    {0.000774263682681127    , 0.99559712572937275},
    {0.0009326033468832199   , 0.99472511922056885},
    {0.0011233240329780276   , 0.9936838854728206},
    {0.0013530477745798076   , 0.99244172287212327},
    {0.0016297508346206436   , 0.9909613681368762},
    {0.0019630406500402726   , 0.989199147349137},
    {0.002364489412645407    , 0.9871040414629611},
    {0.002848035868435802    , 0.98461667444931756},
    {0.003430469286314919    , 0.98166824065048224},
    {0.004132012400115334    , 0.97817939940732401},
    {0.004977023564332114    , 0.97405918024258629},
    {0.005994842503189409    , 0.96920396143582883},
    {0.007220809018385464    , 0.96349660912953617},
    {0.008697490026177835    , 0.95680589317840707},
    {0.010476157527896652    , 0.94898632909723336},
    {0.012618568830660211    , 0.93987863084221497},
    {0.01519911082952933     , 0.9293109932908434},
    {0.01830738280295368     , 0.91710145049183539},
    {0.022051307399030457    , 0.90306156775236618},
    {0.026560877829466867    , 0.8870017114571972},
    {0.03199267137797385     , 0.86873808719985669},
    {0.03853528593710531     , 0.84810163114009633},
    {0.046415888336127774    , 0.82494867126984355},
    {0.05590810182512223     , 0.79917304194513927},
    {0.06734150657750822     , 0.7707190473228817},
    {0.08111308307896872     , 0.73959435604881232},
    {0.09770099572992257     , 0.70588161955485569},
    {0.11768119524349979     , 0.66974740495021664},
    {0.14174741629268048     , 0.63144699153505852},
    {0.17073526474706904     , 0.59132375597474917},
    {0.20565123083486514     , 0.54980229062810477},
    {0.24770763559917114     , 0.50737503766882411},
    {0.298364724028334       , 0.46458299752913831},
    {0.3593813663804626      , 0.4219918571290999},
    {0.4328761281083057      , 0.38016553540696277},
    {0.5214008287999684      , 0.33963953151976838},
    {0.6280291441834253      , 0.30089650594709209},
    {0.7564633275546291      , 0.26434621900660595},
    {0.9111627561154896      , 0.23031135925847097},
    {1.0974987654930568      , 0.19902003328504882},
    {1.3219411484660286      , 0.17060489760490778},
    {1.592282793341094       , 0.14510822098313027},
    {1.9179102616724888      , 0.12249166236675658},
    {2.310129700083158       , 0.10264927832619089},
    {2.782559402207126       , 0.085422228859606747},
    {3.351602650938841       , 0.070613790387424534},
    {4.037017258596558       , 0.058003548812168467},
    {4.862601580065354       , 0.047359969145031094},
    {5.857020818056661       , 0.038450865434712062},
    {7.054802310718645       , 0.031051584943670395},
    {8.497534359086439       , 0.024950950214688334},
    {10.235310218990268      , 0.019955163671591963},
    {12.32846739442066       , 0.015889974979025331},
    {14.849682622544666      , 0.01260145190417811},
    {17.886495290574352      , 0.0099556943918115909},
    {21.54434690031882       , 0.0078378027000806489},
    {25.950242113997373      , 0.0061503658060771635},
    {31.25715849688235       , 0.0048116853694434298},
    {37.649358067924716      , 0.0037539000748268729},
    {45.34878508128582       , 0.0029211293922820861},
    {54.62277217684337       , 0.002267716909519939},
    {65.79332246575683       , 0.0017566221304030796},
    {79.24828983539169       , 0.0013579857497991229},
    {95.45484566618347       , 0.0010478760873578429},
    {114.97569953977356      , 0.00080721251256896903},
    {138.48863713938718      , 0.00062085418909399626},
    {166.81005372000593      , 0.00047683825194268335},
    {200.92330025650458      , 0.00036574969283185009},
    {242.01282647943833      , 0.00028020501980703199},
    {291.50530628251755      , 0.00021443259405363366},
    {351.11917342151344      , 0.00016393399426332394},
    {422.9242874389499       , 0.00012521250524541103},
    {509.4138014816375       , 9.5556659887359706e-5},
    {613.5907273413176       , 7.2868545015054635e-5},
    {739.0722033525775       , 5.5528230875877713e-5},
    {890.2150854450392       , 4.2287159012160419e-5},
    {1072.2672220103232      , 3.218460908128779e-5},
    {1291.5496650148827      , 2.448246374823477e-5},
    {1555.6761439304723      , 1.8614414395811575e-5},
    {1873.817422860383       , 1.4146516724500255e-5},
    {2257.0197196339213      , 1.0746634141836671e-5},
    {2718.58824273294        , 8.1608180275862837e-6},
    {3274.5491628777318      , 6.1950861897174488e-6},
    {3944.206059437656       , 4.7013909537142324e-6},
    {4750.810162102794       , 3.566831111893147e-6},
    {5722.3676593502205      , 2.7053700324277833e-6},
    {6892.612104349695       , 2.0514862137521226e-6},
    {8302.175681319752       , 1.5553112782076094e-6},
    {10000.0                 , 1.1789110492903114e-6},
};

inline constexpr EnvelopeReference kEnvelopeSpotChecks[] = {
    {0.01                    , 0.95105553340054942},
    {1.0                     , 0.21431225932175587},
    {0.029                   , 0.87866349589874137},
    {0.031                   , 0.87199448000694691},
    {29.9                    , 0.0051032068639107648},
    {30.1                    , 0.0050583748435996263},
    {1e-08                   , 0.99999994001128379},
};

}  // namespace nanonmr::testing
