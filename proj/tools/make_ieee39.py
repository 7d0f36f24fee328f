"""Writes configs/ieee39_mod.json: the IEEE 39-bus network with ten inverters
(six grid-following, four grid-forming) and no synchronous machines.

    python3 tools/make_ieee39.py > configs/ieee39_mod.json
"""
import argparse
import json

# from, to, r, x on a 100 MVA base
lines = [
(1,2,0.0035,0.0411),(1,39,0.0010,0.0250),(2,3,0.0013,0.0151),(2,25,0.0070,0.0086),(2,30,0.0000,0.0181),
(3,4,0.0013,0.0213),(3,18,0.0011,0.0133),(4,5,0.0008,0.0128),(4,14,0.0008,0.0129),(5,6,0.0002,0.0026),
(5,8,0.0008,0.0112),(6,7,0.0006,0.0092),(6,11,0.0007,0.0082),(6,31,0.0000,0.0250),(7,8,0.0004,0.0046),
(8,9,0.0023,0.0363),(9,39,0.0010,0.0250),(10,11,0.0004,0.0043),(10,13,0.0004,0.0043),(10,32,0.0000,0.0200),
(12,11,0.0016,0.0435),(12,13,0.0016,0.0435),(13,14,0.0009,0.0101),(14,15,0.0018,0.0217),(15,16,0.0009,0.0094),
(16,17,0.0007,0.0089),(16,19,0.0016,0.0195),(16,21,0.0008,0.0135),(16,24,0.0003,0.0059),(17,18,0.0007,0.0082),
(17,27,0.0013,0.0173),(19,20,0.0007,0.0138),(19,33,0.0007,0.0142),(20,34,0.0009,0.0180),(21,22,0.0008,0.0140),
(22,23,0.0006,0.0096),(22,35,0.0000,0.0143),(23,24,0.0022,0.0350),(23,36,0.0005,0.0272),(25,26,0.0032,0.0323),
(25,37,0.0006,0.0232),(26,27,0.0014,0.0147),(26,28,0.0043,0.0474),(26,29,0.0057,0.0625),(28,29,0.0014,0.0151),
(29,38,0.0008,0.0156),
# added in the modified system: tie between buses 18 and 19
(18,19,0.0010,0.0150),
]
loads = {3:322,4:500,7:233.8,8:522,12:7.5,15:320,16:329,18:158,20:628,21:274,23:247.5,24:308.6,25:224,26:139,27:281,28:206,29:283.5,31:9.2,39:1104}
ibrs = [("IBR1-GFL1",10,2,0.1,1100,None,3000,50,None,None,200,50),
("IBR2-GFL2",1,2,0.1,1100,None,3200,50,None,None,200,50),
("IBR3-GFL3",3,2,0.1,1100,None,3200,50,None,None,100,20),
("IBR4-GFL4",4,2,0.1,1100,None,3200,50,None,None,200,50),
("IBR5-GFL5",5,2,0.1,1100,None,3200,50,None,None,200,70),
("IBR6-GFL6",6,2,0.1,1100,None,3200,50,None,None,200,50),
("IBR7-GFM1",2,3,0,1100,10,None,None,40,10,12.5,2.5),
("IBR8-GFM2",9,3,0,1100,10,None,None,40,10,12.5,2.5),
("IBR9-GFM3",8,4,0,1100,10,None,None,40,10,12.5,2.5),
("IBR10-GFM4",7,5,0,1100,10,None,None,40,10,12.5,2.5)]
gfl_b = {"D":[1000,5000],"Ki_PLL":[2500,4000],"Kp_PLL":[30,100],"Ki_i":[20,300],"Kp_i":[20,70]}
gfm_b = {"D":[1000,5000],"M":[8,30],"Ki_v":[20,60],"Kp_v":[5,40],"Ki_i":[8,20],"Kp_i":[1,5]}
ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
ap.add_argument("--c-gfl", type=float, default=8.0, help="GFL current-loop lag constant")
ap.add_argument("--c-gfm", type=float, default=0.05, help="GFM voltage/current lag constant")
ap.add_argument("--gfl-rating", type=float, default=0.6, help="GFL rating, system pu")
ap.add_argument("--gfm-loading", type=float, default=0.6, help="GFM dispatch as a fraction of its rating")
ap.add_argument("--generator-buses", action="store_true",
                help="read the unit bus column as IEEE-39 generator numbers")
args = ap.parse_args()
num = lambda v: int(v) if float(v).is_integer() else v
cfg = {"c_gfl": num(args.c_gfl), "c_gfm": args.c_gfm, "gfl_rating": args.gfl_rating,
       "gfm_loading": args.gfm_loading, "gen_map": args.generator_buses}
total_load = 6.0
sum_pinit = sum(i[2] for i in ibrs)
out_ibrs=[]
btype = {b:("load" if b in loads else "passive") for b in range(1,40)}
# generator numbering: G1 sits at bus 39, G2..G9 at 31..38, G10 at 30
gen_bus = {1:39, 2:31, 3:32, 4:33, 5:34, 6:35, 7:36, 8:37, 9:38, 10:30}
for (name,gen,p,q,D,M,kipll,kppll,kiv,kpv,kii,kpi) in ibrs:
    bus = gen_bus[gen] if cfg.get("gen_map",False) else gen
    gfl = "GFL" in name
    btype[bus] = "gfl" if gfl else "gfm"
    pref = round(p*total_load/sum_pinit, 6)
    if gfl:
        params = {"D":D,"Ki_PLL":kipll,"Kp_PLL":kppll,"Ki_i":kii,"Kp_i":kpi}; b=gfl_b
        rating = cfg.get("gfl_rating",0.6)
    else:
        params = {"D":D,"M":M,"Ki_v":kiv,"Kp_v":kpv,"Ki_i":kii,"Kp_i":kpi}; b=gfm_b
        rating = round(pref/cfg.get("gfm_loading",0.6),4)
    out_ibrs.append({"name":name,"kind":"gfl" if gfl else "gfm","bus":bus,"rating":rating,"p_ref":pref,"q_ref":0.0,
      "info":{"p_init_mw":p,"q_init_mvar":q},
      "params":{k:{"initial":v,"lower":b[k][0],"upper":b[k][1]} for k,v in params.items()}})
grid = {"schema":1,"name":"ieee39_mod",
 "bases":{"power_mva":1000,"frequency_hz":60,"impedance_mva":100},
 "numerics":{"dt_sim":0.001,"dt_sample":0.005,"horizon":5.0,"pmeas_filter":0.02,"bus_freq_filter":0.02,
   "loop_constant_gfl":cfg.get("c_gfl",0.05),"loop_constant_gfm":cfg.get("c_gfm",0.05),"gfl_power_limit":1.2},
 "buses":[{"id":b,"type":btype[b]} for b in range(1,40)],
 "lines":[{"from":f,"to":t,"x":x,"r":r} for (f,t,r,x) in lines],
 "loads":{"total_pu":total_load,"items":[{"bus":b,"p_mw":p} for b,p in sorted(loads.items())]},
 "ibrs":out_ibrs}
print(json.dumps(grid,indent=2))
